use super::*;
use crate::bnb::{solve_milp, BnbOptions, MilpStatus, Separator};
use crate::instance::Instance;

fn path3() -> Instance {
    Instance::parse("nodes 3\nrequired 1 3\nedge 1 2 1\nedge 2 3 1\n").unwrap()
}

/// Triangle 1-2-3 with a pendant 4 hanging off 3; every node required.
fn kite() -> Instance {
    Instance::builder(4)
        .edge(1, 2, 2.0)
        .edge(2, 3, 3.0)
        .edge(1, 3, 4.0)
        .edge(3, 4, 1.0)
        .required([2, 4])
        .build()
        .unwrap()
}

fn windows(s: f64, b4: f64) -> Instance {
    Instance::builder(4)
        .timed_edge(1, 2, 1.0, 1.0)
        .timed_edge(1, 3, 1.0, 1.0)
        .timed_edge(2, 4, 1.0, 1.0)
        .required([2, 3, 4])
        .window(2, 1.0, 1.0)
        .window(3, 3.0, 3.0)
        .window(4, b4, b4)
        .service(2, s)
        .service(3, s)
        .service(4, s)
        .horizon(10.0)
        .build()
        .unwrap()
}

fn solve(f: &Formulation) -> crate::bnb::MilpSolution {
    let mut sep = f.separator();
    let sep_ref = sep.as_mut().map(|s| s as &mut dyn Separator);
    solve_milp(&f.model, sep_ref, &BnbOptions::default()).unwrap()
}

#[test]
fn tag_names_round_trip() {
    for &t in FormulationTag::STSP.iter().chain(&FormulationTag::SOP).chain(&FormulationTag::SCPTP) {
        assert_eq!(t.name().parse::<FormulationTag>().unwrap(), t);
        assert_eq!(t.name().to_lowercase().parse::<FormulationTag>().unwrap(), t);
    }
    assert!("MTZ".parse::<FormulationTag>().is_err());
}

#[test]
fn every_stsp_tag_solves_the_path_to_four() {
    for &tag in &FormulationTag::STSP {
        let f = build(&path3(), tag, BuildOptions::default()).unwrap();
        let sol = solve(&f);
        assert_eq!(sol.status, MilpStatus::Optimal, "{tag}");
        assert!((sol.objective.unwrap() - 4.0).abs() < 1e-6, "{tag}: {:?}", sol.objective);
        let uses = f.extract_edge_uses(sol.x.as_ref().unwrap()).unwrap();
        assert_eq!(uses, vec![2, 2], "{tag}");
    }
}

#[test]
fn scf_row_count_on_the_path() {
    let f = build(&path3(), FormulationTag::Scf, BuildOptions::default()).unwrap();
    let linking = f.model.constraints().iter().filter(|c| c.name.starts_with("cap_")).count();
    assert_eq!(f.model.stats().n_constraints - linking, 7);
    assert_eq!(linking, 4);
    assert!(f.model.var("xt_1_2").is_some() && f.model.var("g_3_2").is_some());
}

#[test]
fn strong_scf_zeroes_the_last_customer() {
    let f = build(&path3(), FormulationTag::ScfStrong, BuildOptions::default()).unwrap();
    let row = f.model.constraint("cap_3_2").unwrap();
    assert!(row.coeffs.iter().all(|&(j, _)| f.model.variable(j).name == "g_3_2"));
}

#[test]
fn kite_optimum_agrees_across_tags() {
    // 1-2-3-4-3-1 costs 2 + 3 + 1 + 1 + 4 = 11; 1-2-1-3-4-3-1 costs 14.
    for &tag in &FormulationTag::STSP {
        let f = build(&kite(), tag, BuildOptions::default()).unwrap();
        let sol = solve(&f);
        assert!((sol.objective.unwrap() - 11.0).abs() < 1e-6, "{tag}: {:?}", sol.objective);
    }
}

#[test]
fn depot_only_requirement_costs_nothing() {
    let inst = Instance::builder(2).edge(1, 2, 1.0).build().unwrap();
    for &tag in &FormulationTag::STSP {
        let f = build(&inst, tag, BuildOptions::default()).unwrap();
        assert!(solve(&f).objective.unwrap().abs() < 1e-9, "{tag}");
    }
}

#[test]
fn too_few_stages_rejected() {
    let opts = BuildOptions {
        stages: Some(1),
        ..Default::default()
    };
    assert!(matches!(build(&path3(), FormulationTag::Ts1, opts), Err(Error::InvalidArgument(_))));
}

#[test]
fn variant_payloads_are_checked() {
    assert!(matches!(
        build(&path3(), FormulationTag::SopMcf, BuildOptions::default()),
        Err(Error::MissingPayload(_))
    ));
    assert!(matches!(
        build(&path3(), FormulationTag::Stsptw, BuildOptions::default()),
        Err(Error::MissingPayload(_))
    ));
}

fn sop_kite(budget: f64) -> Instance {
    kite()
        .to_builder()
        .revenue(2, 5.0)
        .revenue(4, 3.0)
        .budget(budget)
        .build()
        .unwrap()
}

#[test]
fn sop_tags_agree() {
    // Budget 4 reaches node 2 only (1-2-1); 10 also covers 1-3-4-3-1; 11 serves both.
    for (budget, best) in [(3.0, 0.0), (4.0, 5.0), (10.0, 5.0), (11.0, 8.0)] {
        for &tag in &FormulationTag::SOP {
            let f = build(&sop_kite(budget), tag, BuildOptions::default()).unwrap();
            let sol = solve(&f);
            assert!(
                (sol.objective.unwrap() - best).abs() < 1e-6,
                "{tag} U={budget}: {:?}",
                sol.objective
            );
        }
    }
}

#[test]
fn scptp_tags_agree_and_respect_capacity() {
    let inst = kite()
        .to_builder()
        .revenue(2, 10.0)
        .revenue(4, 20.0)
        .demand(2, 2.0)
        .demand(4, 3.0)
        .capacity(4.0)
        .build()
        .unwrap();
    // Capacity admits one customer: node 4 via 1-3-4-3-1 earns 20 - 10.
    for &tag in &FormulationTag::SCPTP {
        let f = build(&inst, tag, BuildOptions::default()).unwrap();
        let sol = solve(&f);
        assert!((sol.objective.unwrap() - 10.0).abs() < 1e-6, "{tag}: {:?}", sol.objective);
        let x = sol.x.unwrap();
        let (load, q) = scptp_capacity_audit(&inst, &f, &x).unwrap();
        assert!(load <= q + 1e-6);
    }
}

#[test]
fn excess_capacity_needs_opt_in() {
    let inst = kite()
        .to_builder()
        .revenue(2, 1.0)
        .revenue(4, 1.0)
        .demand(2, 1.0)
        .demand(4, 1.0)
        .capacity(5.0)
        .build()
        .unwrap();
    assert!(build(&inst, FormulationTag::ScptpMcf, BuildOptions::default()).is_err());
    let opts = BuildOptions {
        allow_excess_capacity: true,
        ..Default::default()
    };
    assert!(build(&inst, FormulationTag::ScptpMcf, opts).is_ok());
}

#[test]
fn time_window_example_without_service_time() {
    let inst = windows(0.0, 6.0);
    let f = build(&inst, FormulationTag::Stsptw, BuildOptions::default()).unwrap();
    let sol = solve(&f);
    assert_eq!(sol.status, MilpStatus::Optimal);
    assert!((sol.objective.unwrap() - 8.0).abs() < 1e-6);
    let x = sol.x.unwrap();
    let uses = f.extract_edge_uses(&x).unwrap();
    let e12 = inst.edge_between(1, 2).unwrap();
    assert_eq!(uses[e12], 4);
    let route = f.stsptw_route(&inst, &x).unwrap();
    let order: Vec<_> = route.services.iter().map(|s| s.node).collect();
    assert_eq!(order, vec![2, 3, 4]);
    assert!(route.violations.is_empty(), "{:?}", route.violations);
    assert_eq!(route.walk.len(), 9);
}

#[test]
fn time_window_example_is_infeasible_with_unit_service() {
    let f = build(&windows(1.0, 6.0), FormulationTag::Stsptw, BuildOptions::default()).unwrap();
    assert_eq!(solve(&f).status, MilpStatus::Infeasible);
}

#[test]
fn tightened_window_is_infeasible() {
    let f = build(&windows(0.0, 5.0), FormulationTag::Stsptw, BuildOptions::default()).unwrap();
    assert_eq!(solve(&f).status, MilpStatus::Infeasible);
}

#[test]
fn model_names_follow_the_scheme() {
    let inst = windows(0.0, 6.0);
    let f = build(&inst, FormulationTag::Stsptw, BuildOptions::default()).unwrap();
    for name in ["xt_1_2_0", "g_4_2_3", "y_3_2"] {
        assert!(f.model.var(name).is_some(), "{name}");
    }
    let f = build(&path3(), FormulationTag::Mcf, BuildOptions::default()).unwrap();
    assert!(f.model.var("f_2_3_3").is_some());
    let f = build(&path3(), FormulationTag::Ts2, BuildOptions::default()).unwrap();
    assert!(f.model.var("r_1_2_1").is_some() && f.model.var("r_2_3_4").is_some());
    assert_eq!(f.model.variable(f.model.var("r_2_3_1").unwrap()).upper, 0.0);
}
