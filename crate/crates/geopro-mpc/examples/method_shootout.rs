//! Runs every planning method on the head-on crossing scene and prints a
//! side-by-side result table. The cone-projection planner and the reactive
//! controller clear the scene; the clearance-disk variant reacts on position
//! only and, at short horizons, sees the closing obstacle too late.

use std::path::Path;

use geopro_mpc::{emit_plot, load_scenario, run_closed_loop, Method};

fn main() -> geopro_mpc::Result<()> {
    let scenario_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/d1.json");
    let scenario = load_scenario(&scenario_path)?;
    let horizon = 2;

    let methods = [Method::GeoProVo, Method::GeoProEd, Method::ReactiveVo];
    let mut traces = Vec::new();

    println!("scene {}, horizon {horizon}", scenario.name);
    println!(
        "{:<12} {:>10} {:>9} {:>14} {:>12}",
        "method", "outcome", "t_final", "min clearance", "median ms"
    );
    for method in methods {
        let trace = run_closed_loop(&scenario, method, Some(horizon))?;
        let clearance = trace
            .min_clearance()
            .map(|c| format!("{c:.4}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<12} {:>10} {:>9.2} {:>14} {:>12.3}",
            method.name(),
            format!("{:?}", trace.outcome),
            trace.t_final,
            clearance,
            trace.solve_time_stats().median
        );
        traces.push(trace);
    }

    let svg = Path::new("example_out").join("shootout_d1.svg");
    emit_plot(&traces, &svg)?;
    println!("\noverlay plot: {}", svg.display());
    Ok(())
}
