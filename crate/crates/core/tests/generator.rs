use gsp_mediator::scenario_io::GeneratorBlock;
use gsp_mediator::{
    compare, generate_scenario, generate_scenarios, parse_scenario, serialize_scenario,
    write_report, GeneratorParams, ReportFormat, ScenarioDocument,
};

#[test]
fn scenarios_regenerate_individually() {
    let params = GeneratorParams::default();
    let stream: Vec<_> = generate_scenarios(9, 20, params.clone()).unwrap().collect();
    assert_eq!(stream.len(), 20);
    for (i, s) in stream.iter().enumerate() {
        assert_eq!(&generate_scenario(9, i as u64, &params).unwrap(), s);
    }
    assert_ne!(stream[0], stream[1]);
    assert_ne!(generate_scenario(10, 0, &params).unwrap(), stream[0]);
}

#[test]
fn generated_scenarios_respect_bounds() {
    let params = GeneratorParams::default();
    for s in generate_scenarios(3, 200, params.clone()).unwrap() {
        let k = s.ctr.slots();
        assert!((1..=10).contains(&k));
        assert!((1..=50).contains(&s.advertisers.len()));
        let m = s.mediator.as_ref().unwrap();
        assert!(m.fitness() * s.ctr.top() < 1.0);
        assert!((1..=k).contains(&m.secondary_slots));
    }
}

#[test]
fn aligned_scenarios_share_the_ranking() {
    let params = GeneratorParams {
        aligned: true,
        ..GeneratorParams::default()
    };
    for s in generate_scenarios(5, 50, params).unwrap() {
        let report = compare(&s).unwrap();
        let k = s.ctr.slots();
        assert_eq!(s.mediator.as_ref().unwrap().secondary_slots, k);
        assert_eq!(
            report.with_mediator.s_auction.ranking.agents(),
            report.baseline.p_auction.ranking.agents()
        );
    }
}

#[test]
fn bad_parameters_are_rejected() {
    let bad = GeneratorParams {
        min_slots: 4,
        max_slots: 2,
        ..GeneratorParams::default()
    };
    assert_eq!(
        generate_scenario(0, 0, &bad).unwrap_err().code(),
        "E-GENERATOR"
    );
    assert!(generate_scenarios(0, 0, GeneratorParams::default()).is_err());
}

#[test]
fn round_trip_and_identical_reports() {
    let params = GeneratorParams::default();
    for (i, s) in generate_scenarios(11, 100, params.clone())
        .unwrap()
        .enumerate()
    {
        let text = serialize_scenario(&s);
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(serialize_scenario(&back), text);
        let again = generate_scenario(11, i as u64, &params).unwrap();
        for format in [ReportFormat::Table, ReportFormat::Structured] {
            assert_eq!(
                write_report(&compare(&s).unwrap(), format),
                write_report(&compare(&again).unwrap(), format)
            );
        }
    }
}

#[test]
fn generator_block_round_trips() {
    let params = GeneratorParams {
        aligned: true,
        max_slots: 3,
        ..GeneratorParams::default()
    };
    let s = generate_scenario(1, 7, &params).unwrap();
    let doc = ScenarioDocument::from_scenario(
        &s,
        Some(GeneratorBlock {
            seed: 1,
            index: 7,
            params: params.clone(),
        }),
    );
    let parsed = ScenarioDocument::parse(&doc.to_toml()).unwrap();
    assert_eq!(parsed, doc);
    let block = parsed.generator.unwrap();
    assert_eq!(
        generate_scenario(block.seed, block.index, &block.params).unwrap(),
        s
    );
}
