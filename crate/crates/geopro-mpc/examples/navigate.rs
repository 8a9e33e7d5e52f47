//! Full closed-loop run on the bundled navigation scene, written out as the
//! usual artifact set (CSV trace, metadata, SVG plot, text summary).

use std::path::Path;

use geopro_mpc::{load_scenario, run_closed_loop, Method};

fn main() -> geopro_mpc::Result<()> {
    let scenario_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/nav.json");
    let scenario = load_scenario(&scenario_path)?;
    println!(
        "scenario {}: start ({:.2}, {:.2}) goal ({:.2}, {:.2}), {} obstacle(s)",
        scenario.name,
        scenario.robot.start.x,
        scenario.robot.start.y,
        scenario.robot.goal.x,
        scenario.robot.goal.y,
        scenario.obstacles.len()
    );

    let trace = run_closed_loop(&scenario, Method::GeoProVo, Some(6))?;
    println!(
        "outcome: {:?} after {:.2} s ({} steps)",
        trace.outcome,
        trace.t_final,
        trace.rows.len()
    );
    if let Some(c) = trace.min_clearance() {
        println!("minimum center distance to any obstacle: {:.4} m", c);
    }
    let timing = trace.solve_time_stats();
    println!(
        "solve time per step: median {:.3} ms, mean {:.3} ms, max {:.3} ms",
        timing.median, timing.avg, timing.max
    );

    let out = Path::new("example_out").join("nav_geopro-vo_N6");
    let files = trace.write_files(&out, false)?;
    println!("\nwrote:");
    for f in &files {
        println!("  {}", f.display());
    }
    Ok(())
}
