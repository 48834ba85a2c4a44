use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::Path;
use std::thread;

use ambush_core::eval::evaluate_against;
use ambush_core::fixtures::{diamond, hill_field, HILL_DESTINATION, HILL_ORIGIN};
use ambush_core::game::{solve_minimax_with, GameOptions};
use ambush_core::io::write_atomic;
use ambush_core::netgen::{build_network, prune_threshold};
use ambush_core::riskmap::load_risk_field;
use ambush_core::{sample_paths, Equilibrium, Network, Planner, RiskField, SolverTag};

use crate::config::{RunConfig, Source};
use crate::{render, Failure};

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(ambush_core::Error::from)?;
    write_atomic(&dir.join(name), text.as_bytes()).map_err(ambush_core::Error::from)?;
    Ok(())
}

/// Network and, when there is one, the field it was built from.
fn load(rc: &RunConfig) -> Result<(Network, Option<RiskField>), Failure> {
    let built = |field: RiskField, origin, dest| -> Result<_, Failure> {
        let net = build_network(&field, rc.method, rc.node_budget, origin, dest, rc.seed)?;
        Ok((net, Some(field)))
    };
    let (net, field) = match &rc.source {
        Source::Network(path) => (Network::load(path)?, None),
        Source::Diamond => (diamond(), None),
        Source::Hill => built(
            hill_field(),
            rc.origin.unwrap_or(HILL_ORIGIN),
            rc.dest.unwrap_or(HILL_DESTINATION),
        )?,
        Source::Field(path) => {
            let (Some(origin), Some(dest)) = (rc.origin, rc.dest) else {
                return Err(Failure::Usage(
                    "--origin and --dest are required with --field".into(),
                ));
            };
            built(load_risk_field(path)?, origin, dest)?
        }
    };
    let net = match rc.alpha_threshold {
        Some(t) => prune_threshold(&net, t)?,
        None => net,
    };
    Ok((net, field))
}

fn equilibrium(rc: &RunConfig, net: &Network, solver: SolverTag) -> Result<Equilibrium, Failure> {
    let mut opts = GameOptions::default();
    if let Some(cap) = rc.max_iterations {
        opts.simplex.max_iterations = cap;
        opts.ipm.max_iterations = cap;
    }
    Ok(solve_minimax_with(net, solver, rc.length_weight, &opts)?)
}

pub fn build(rc: &RunConfig) -> Result<(), Failure> {
    let (net, _) = load(rc)?;
    write(&rc.out, "network.json", &(net.to_json()? + "\n"))?;
    println!("{} nodes, {} edges", net.node_count(), net.edge_count());
    Ok(())
}

fn plots(
    rc: &RunConfig,
    net: &Network,
    field: Option<&RiskField>,
    eq: &Equilibrium,
) -> Result<(), Failure> {
    write(
        &rc.out,
        "strategy.svg",
        &render::strategy_svg(net, &eq.p, field),
    )?;
    write(
        &rc.out,
        "directions.svg",
        &render::direction_svg(net, &eq.p, field),
    )?;
    write(&rc.out, "strategy.dot", &render::strategy_dot(net, &eq.p))
}

pub fn solve(rc: &RunConfig) -> Result<(), Failure> {
    let (net, field) = load(rc)?;
    let eq = equilibrium(rc, &net, rc.solver)?;
    write(&rc.out, "equilibrium.json", &(eq.to_json()? + "\n"))?;
    if rc.plot {
        plots(rc, &net, field.as_ref(), &eq)?;
    }
    println!(
        "{}: z* {:.6}, entropy {:.4}, E {:.4}, ambush node {}, {} iterations",
        eq.solver_tag, eq.z_star, eq.entropy, eq.expected_length, eq.ambush_node, eq.iterations
    );
    Ok(())
}

pub fn compare(rc: &RunConfig) -> Result<(), Failure> {
    let (net, field) = load(rc)?;
    let (simplex, ipm) = thread::scope(|s| {
        let a = s.spawn(|| equilibrium(rc, &net, SolverTag::Simplex));
        let b = equilibrium(rc, &net, SolverTag::Ipm);
        (a.join().expect("solver thread panicked"), b)
    });
    let (simplex, ipm) = (simplex?, ipm?);

    let mut solvers = String::from("solver,z,entropy,E,iterations\n");
    for eq in [&simplex, &ipm] {
        let _ = writeln!(
            solvers,
            "{},{:.9},{:.6},{:.6},{}",
            eq.solver_tag, eq.z_star, eq.entropy, eq.expected_length, eq.iterations
        );
    }

    let reference = if rc.solver == SolverTag::Simplex {
        &simplex
    } else {
        &ipm
    };
    let mut planners = format!("{}\n", ambush_core::EvalReport::CSV_HEADER);
    for planner in [
        Planner::Stochastic(rc.solver),
        Planner::Shortest,
        Planner::Safest,
    ] {
        let report = evaluate_against(&net, planner, reference, rc.iterations, rc.seed)?;
        planners.push_str(&report.csv_row());
        planners.push('\n');
    }

    write(&rc.out, "solvers.csv", &solvers)?;
    write(&rc.out, "planners.csv", &planners)?;
    if rc.plot {
        plots(rc, &net, field.as_ref(), reference)?;
    }
    print!("{solvers}\n{planners}");
    Ok(())
}

pub fn sample(rc: &RunConfig) -> Result<(), Failure> {
    let (net, _) = load(rc)?;
    let eq = equilibrium(rc, &net, rc.solver)?;
    let paths = sample_paths(&net, &eq.p, rc.count, rc.seed)?;
    let mut text = String::new();
    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0.0;
    for path in &paths {
        let ids: Vec<String> = path.nodes.iter().map(|j| j.to_string()).collect();
        text.push_str(&ids.join(" "));
        text.push('\n');
        total += path.length;
        *histogram
            .entry(format!("{:.6}", path.max_alpha))
            .or_default() += 1;
    }
    let mean = if paths.is_empty() {
        0.0
    } else {
        total / paths.len() as f64
    };
    let _ = writeln!(text, "# count {}", paths.len());
    let _ = writeln!(text, "# seed {}", rc.seed);
    let _ = writeln!(text, "# mean_length {mean:.6}");
    let _ = writeln!(text, "# max_alpha count");
    for (alpha, n) in &histogram {
        let _ = writeln!(text, "# {alpha} {n}");
    }
    write(&rc.out, "paths.txt", &text)?;
    println!("{} paths, mean length {mean:.4}", paths.len());
    Ok(())
}
