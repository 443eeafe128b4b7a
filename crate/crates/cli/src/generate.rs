use std::io::Write;

use rrt_core::coalescent::{run_coalescent, sample_conditional_degrees, SelectionRecord};
use rrt_core::experiments::{check_trace, check_tree, run_replicates};
use rrt_core::oracle::exact_rrt_law;
use rrt_core::seed::{rng_from_seed, DOMAIN_MODEL};
use rrt_core::{build_rrt, Vertex};
use serde_json::json;

use crate::args::{GenCoalescentArgs, GenRrtArgs, SelfcheckArgs, TraceFormat};
use crate::output::{header, resolve_seed, Sink};
use crate::{CliError, Outcome};

fn io(e: std::io::Error) -> CliError {
    CliError::Failure(e.to_string())
}

pub fn gen_rrt(a: &GenRrtArgs) -> Outcome {
    let seed = resolve_seed(a.common.seed);
    let tree = build_rrt(a.n, &mut rng_from_seed(seed))?;
    let config = json!({ "command": "gen-rrt", "n": a.n, "seed": seed });
    let mut sink = Sink::new(
        a.common.out.as_deref(),
        &format!("rrt_n{}_seed{seed}.csv", a.n),
    )?;
    writeln!(sink, "{}", header(seed, &config)).map_err(io)?;
    tree.write_edge_list(&mut sink).map_err(io)?;
    if let Some(p) = sink.finish()? {
        println!("wrote {}", p.display());
    }
    Ok(true)
}

pub fn gen_coalescent(a: &GenCoalescentArgs) -> Outcome {
    let seed = resolve_seed(a.common.seed);
    let trace = run_coalescent(a.n, &mut rng_from_seed(seed))?;
    let format = match a.format {
        TraceFormat::Jsonl => "jsonl",
        TraceFormat::Edges => "edges",
        TraceFormat::Relabelled => "relabelled",
    };
    let config = json!({ "command": "gen-coalescent", "n": a.n, "seed": seed, "format": format });
    let ext = if matches!(a.format, TraceFormat::Jsonl) {
        "jsonl"
    } else {
        "csv"
    };
    let mut sink = Sink::new(
        a.common.out.as_deref(),
        &format!("coalescent_{format}_n{}_seed{seed}.{ext}", a.n),
    )?;
    writeln!(sink, "{}", header(seed, &config)).map_err(io)?;
    match a.format {
        TraceFormat::Jsonl => trace.write_jsonl(&mut sink),
        TraceFormat::Edges => trace.final_tree().write_edge_list(&mut sink),
        TraceFormat::Relabelled => trace.relabelled_tree().write_edge_list(&mut sink),
    }
    .map_err(io)?;
    if let Some(p) = sink.finish()? {
        println!("wrote {}", p.display());
    }
    Ok(true)
}

/// Invariants on direct trees, coalescent traces and conditioned traces,
/// plus exact uniformity of the coupling at `n = 4`.
pub fn selfcheck(a: &SelfcheckArgs) -> Outcome {
    if a.n < 2 || a.reps == 0 {
        return Err(CliError::Usage(
            "selfcheck needs n >= 2 and reps >= 1".into(),
        ));
    }
    let seed = resolve_seed(a.common.seed);
    let n = a.n;
    let k = n.min(32);
    let tracked: Vec<Vertex> = (1..=k as Vertex).collect();
    let degrees: Vec<u32> = if n >= 8 { vec![2, 1] } else { vec![1] };
    let results: Vec<Option<String>> =
        run_replicates(seed, DOMAIN_MODEL, a.reps, a.common.threads, |r, rng| {
            let tree = build_rrt(n, rng)?;
            let trace = run_coalescent(n, rng)?;
            let rec = SelectionRecord::from_trace(&trace, k)?;
            let cond = sample_conditional_degrees(n, &degrees, rng)?;
            let failure = check_tree(&tree, &tracked, true)
                .err()
                .or_else(|| check_trace(&trace, &rec).err())
                .or_else(|| check_trace(&cond.trace, &cond.record).err());
            Ok(failure.map(|m| format!("replicate {r}: {m}")))
        })?;
    let violations: Vec<&String> = results.iter().flatten().collect();
    for v in &violations {
        eprintln!("{v}");
    }
    let law = exact_rrt_law(4)?;
    let uniform = law.len() == 6 && law.iter().all(|(_, p)| *p == rrt_core::Prob::new(1, 6));
    let pass = violations.is_empty() && uniform;
    println!(
        "selfcheck: {} replicates at n={n}, {} violations, coupling uniform at n=4: {}",
        a.reps,
        violations.len(),
        if uniform { "yes" } else { "no" }
    );
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}
