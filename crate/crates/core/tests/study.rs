use sweep_core::planner::build_plan;
use sweep_core::report::{write_study_csv, sig10};
use sweep_core::study::{study_alpha, study_delta_v, Range};
use sweep_core::{Execution, SearchParams};

fn reference() -> SearchParams {
    SearchParams::new(100.0, 10.0, 1.0, 1.0).unwrap()
}

#[test]
fn alpha_study_rows_and_monotonicity() {
    let rows = study_alpha(&reference(), &Range::new(2.0, 100.0, 1.0).unwrap(), Execution::Parallel).unwrap();
    assert_eq!(rows.len(), 99);
    for w in rows.windows(2) {
        assert!(w[1].n_iterations >= w[0].n_iterations);
        assert!(w[1].t_total >= w[0].t_total);
    }
}

#[test]
fn delta_v_study_steps_down_by_whole_cycles() {
    let rows =
        study_delta_v(&reference(), &Range::new(0.1, 10.0, 0.1).unwrap(), Execution::Parallel).unwrap();
    assert_eq!(rows.len(), 100);
    let mut plateaus = 0;
    for w in rows.windows(2) {
        assert!(w[1].n_iterations <= w[0].n_iterations);
        assert!(w[1].t_total <= w[0].t_total);
        if w[1].n_iterations == w[0].n_iterations {
            plateaus += 1;
        }
    }
    // piecewise constant: many neighbours share N
    assert!(plateaus > 10);
    assert!(rows.iter().all(|r| r.circular_to_inward > 10.0));
}

#[test]
fn study_row_matches_plan() {
    let base = reference();
    let rows = study_delta_v(&base, &Range::new(1.0, 1.0, 1.0).unwrap(), Execution::Sequential).unwrap();
    let plan = build_plan(&base).unwrap();
    assert_eq!(rows[0].n_iterations, plan.n_iterations);
    assert_eq!(rows[0].t_total, plan.t_total);
    assert_eq!(rows[0].t_in_total, plan.t_in_total);
}

#[test]
fn study_csv_is_stable() {
    let base = reference();
    let grid = Range::new(0.5, 2.0, 0.5).unwrap();
    let render = |exec| {
        let rows = study_delta_v(&base, &grid, exec).unwrap();
        let mut buf = Vec::new();
        write_study_csv("delta_v", &rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let a = render(Execution::Parallel);
    assert_eq!(a, render(Execution::Sequential));
    let lines: Vec<_> = a.lines().collect();
    assert_eq!(
        lines[0],
        "delta_v,n_iterations,t_in_total,t_circular_total,t_one,t_total,circular_to_inward,feasible"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with(&format!("1,{},", build_plan(&base).unwrap().n_iterations)));
    assert!(lines[2].contains(&sig10(build_plan(&base).unwrap().t_total)));
}
