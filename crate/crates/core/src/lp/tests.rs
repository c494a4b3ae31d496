use proptest::prelude::*;

use super::*;
use crate::milp::VarKind;

/// Vertex enumeration over a bounded box: every choice of `n` tight
/// hyperplanes among rows and bounds, solved densely.
fn vertex_oracle(model: &MilpModel) -> Option<f64> {
    let n = model.variables().len();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in model.constraints() {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            a[j] = v;
        }
        planes.push((a, c.rhs));
    }
    for (j, v) in model.variables().iter().enumerate() {
        for b in [v.lower, v.upper] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            planes.push((a, b));
        }
    }
    let max = model.sense() == ObjSense::Maximize;
    let mut best: Option<f64> = None;
    let k = planes.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_dense(&pick.iter().map(|&i| planes[i].clone()).collect::<Vec<_>>()) {
            if model.max_violation(&x).0 <= 1e-9 {
                let z = model.objective_value(&x);
                best = Some(match best {
                    None => z,
                    Some(b) if max => b.max(z),
                    Some(b) => b.min(z),
                });
            }
        }
        // Next combination.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < k - n + i {
                pick[i] += 1;
                for t in i + 1..n {
                    pick[t] = pick[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_dense(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|(r, b)| {
        let mut v = r.clone();
        v.push(*b);
        v
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for t in c..=n {
                    a[r][t] -= f * a[c][t];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

#[derive(Debug, Clone)]
struct Spec {
    uppers: Vec<u8>,
    rows: Vec<(Vec<i8>, u8, i8)>,
    obj: Vec<i8>,
    max: bool,
}

fn spec() -> impl Strategy<Value = Spec> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(1u8..=4, n),
            prop::collection::vec((prop::collection::vec(-3i8..=3, n), 0u8..3, -3i8..=6), m),
            prop::collection::vec(-4i8..=4, n),
            any::<bool>(),
        )
            .prop_map(|(uppers, rows, obj, max)| Spec { uppers, rows, obj, max })
    })
}

fn build(s: &Spec) -> MilpModel {
    let mut m = MilpModel::new();
    for (j, &u) in s.uppers.iter().enumerate() {
        m.add_variable(format!("x{j}"), 0.0, u as f64, VarKind::Continuous).unwrap();
    }
    for (i, (a, sense, b)) in s.rows.iter().enumerate() {
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][*sense as usize];
        let coeffs = a.iter().enumerate().map(|(j, &v)| (j, v as f64)).collect();
        m.add_constraint(format!("r{i}"), coeffs, sense, *b as f64).unwrap();
    }
    let obj = s.obj.iter().enumerate().map(|(j, &v)| (j, v as f64)).collect();
    m.set_objective(if s.max { ObjSense::Maximize } else { ObjSense::Minimize }, obj).unwrap();
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_vertex_enumeration(s in spec()) {
        let model = build(&s);
        let (sol, _) = solve_lp(&model, None).unwrap();
        match vertex_oracle(&model) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(z) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - z).abs() < 1e-6, "lp {} oracle {}", sol.objective, z);
                prop_assert!(model.max_violation(&sol.x).0 < 1e-7);
                let l = lagrangian_bound(&model, &sol.duals);
                prop_assert!((l - z).abs() < 1e-6, "dual bound {} vs {}", l, z);
            }
        }
    }

    #[test]
    fn warm_start_after_rows_matches_cold(s in spec(), extra in prop::collection::vec(-3i8..=3, 3), rhs in 0i8..=5) {
        let model = build(&s);
        let (first, state) = solve_lp(&model, None).unwrap();
        prop_assume!(first.status == LpStatus::Optimal);
        let n = model.variables().len();
        let row = Constraint::new("cut", (0..n).map(|j| (j, extra[j] as f64)).collect(), Sense::Le, rhs as f64);
        let (warm, _) = reoptimize_with_rows(&model, &state, std::slice::from_ref(&row)).unwrap();
        let mut bigger = model.clone();
        bigger.push_constraint(row).unwrap();
        let (cold, _) = solve_lp(&bigger, None).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() < 1e-6);
        }
    }
}

#[test]
fn textbook_max_problem() {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
    let mut m = MilpModel::new();
    let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
    let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
    m.add_constraint("a", vec![(x, 1.0)], Sense::Le, 4.0).unwrap();
    m.add_constraint("b", vec![(y, 2.0)], Sense::Le, 12.0).unwrap();
    m.add_constraint("c", vec![(x, 3.0), (y, 2.0)], Sense::Le, 18.0).unwrap();
    m.set_objective(ObjSense::Maximize, vec![(x, 3.0), (y, 5.0)]).unwrap();
    let (sol, _) = solve_lp(&m, None).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 36.0).abs() < 1e-9);
    assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
    assert!((sol.duals[1] - 1.5).abs() < 1e-9 && (sol.duals[2] - 1.0).abs() < 1e-9);
    assert!((lagrangian_bound(&m, &sol.duals) - 36.0).abs() < 1e-9);
}

#[test]
fn detects_unbounded_and_infeasible() {
    let mut m = MilpModel::new();
    let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
    let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
    m.add_constraint("a", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0).unwrap();
    m.set_objective(ObjSense::Maximize, vec![(x, 1.0)]).unwrap();
    assert_eq!(solve_lp(&m, None).unwrap().0.status, LpStatus::Unbounded);

    m.add_constraint("b", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 5.0).unwrap();
    m.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Sense::Le, 4.0).unwrap();
    m.set_objective(ObjSense::Minimize, vec![(x, 1.0)]).unwrap();
    assert_eq!(solve_lp(&m, None).unwrap().0.status, LpStatus::Infeasible);
}

#[test]
fn bound_changes_reuse_the_basis() {
    let mut m = MilpModel::new();
    let x = m.add_continuous("x", 0.0, 10.0).unwrap();
    let y = m.add_continuous("y", 0.0, 10.0).unwrap();
    m.add_constraint("s", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.5).unwrap();
    m.set_objective(ObjSense::Minimize, vec![(x, 1.0), (y, 2.0)]).unwrap();
    let mut lp = Lp::new(&m);
    let a = lp.solve().unwrap();
    assert!((a.objective - 3.5).abs() < 1e-9);
    lp.set_bounds(x, 0.0, 3.0);
    let b = lp.solve().unwrap();
    assert!((b.objective - 4.0).abs() < 1e-9);
    lp.set_bounds(y, 0.0, 0.0);
    assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's example, which cycles under naive Dantzig pricing.
    let mut m = MilpModel::new();
    let v: Vec<usize> = (0..4).map(|j| m.add_continuous(format!("x{j}"), 0.0, f64::INFINITY).unwrap()).collect();
    m.add_constraint("r1", vec![(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], Sense::Le, 0.0).unwrap();
    m.add_constraint("r2", vec![(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], Sense::Le, 0.0).unwrap();
    m.add_constraint("r3", vec![(v[2], 1.0)], Sense::Le, 1.0).unwrap();
    m.set_objective(ObjSense::Minimize, vec![(v[0], -0.75), (v[1], 150.0), (v[2], -0.02), (v[3], 6.0)]).unwrap();
    let (sol, _) = solve_lp(&m, None).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 0.05).abs() < 1e-9);
}
