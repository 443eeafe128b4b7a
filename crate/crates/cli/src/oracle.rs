use std::io::Write;

use num_traits::Zero;
use rand::RngExt;
use rrt_core::coalescent::predicate_a;
use rrt_core::oracle::{
    degree_prob_by_selection, enumerate_chains, exact_conditional_law, exact_label_prob,
    exact_rrt_law, falling_factorial, verify_probonevert, verify_product_form, Condition,
    OneVertexQuery, VertexEvent,
};
use rrt_core::seed::rng_from_seed;
use rrt_core::{Prob, SimRng, Vertex};
use serde_json::json;

use crate::args::{OracleArgs, Suite};
use crate::output::{header, resolve_seed, Sink};
use crate::{CliError, Outcome};

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Coupling => "coupling",
        Suite::Probonevert => "probonevert",
        Suite::Product => "product",
        Suite::Labels => "labels",
        Suite::Degprob => "degprob",
        Suite::Conditional => "conditional",
    }
}

pub fn run(a: &OracleArgs) -> Outcome {
    match a.suite {
        Suite::Coupling => coupling(a),
        Suite::Probonevert => probonevert(a),
        Suite::Product => product(a),
        Suite::Labels => labels(a),
        Suite::Degprob => degprob(a),
        Suite::Conditional => conditional(a),
    }
}

fn write_pmf_csv<K: Ord + Clone>(
    a: &OracleArgs,
    seed: u64,
    n: usize,
    pmf: &rrt_core::ExactPmf<K>,
    outcome: impl Fn(&K) -> String,
) -> Result<(), CliError> {
    let config =
        json!({ "command": "oracle", "suite": suite_name(a.suite), "n": n, "degrees": a.degrees });
    let mut sink = Sink::new(
        a.common.out.as_deref(),
        &format!("oracle_{}_n{n}.csv", suite_name(a.suite)),
    )?;
    let io = |e: std::io::Error| CliError::Failure(e.to_string());
    writeln!(sink, "{}", header(seed, &config)).map_err(io)?;
    pmf.write_csv(&mut sink, outcome).map_err(io)?;
    if let Some(p) = sink.finish()? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn coupling(a: &OracleArgs) -> Outcome {
    let n = a.n.unwrap_or(4);
    let law = exact_rrt_law(n)?;
    let chains = enumerate_chains(n, |_| {})?;
    let trees: u64 = (1..n as u64).product();
    let weight = Prob::new(1, trees as i128);
    let pass = law.len() as u64 == trees && law.iter().all(|(_, p)| *p == weight);
    if a.common.out.is_some() {
        write_pmf_csv(a, 0, n, &law, |parents| {
            parents
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })?;
    }
    println!(
        "{} trees × {} chains, uniform: {}",
        law.len(),
        chains / trees,
        verdict(pass)
    );
    Ok(pass)
}

fn random_query(rng: &mut SimRng, event: VertexEvent, max_len: usize) -> OneVertexQuery {
    let n = rng.random_range(4..=40u32);
    let t_n = rng.random_range(2..=n);
    let mut pool: Vec<u32> = (t_n..=n).collect();
    let size = rng.random_range(0..=max_len.min(pool.len()));
    let steps: Vec<u32> = (0..size)
        .map(|_| pool.swap_remove(rng.random_range(0..pool.len())))
        .collect();
    let label = if event == VertexEvent::LabelExactly && !steps.is_empty() && rng.random::<bool>() {
        steps[rng.random_range(0..steps.len())]
    } else {
        rng.random_range(t_n..=n)
    };
    OneVertexQuery {
        n,
        t_n,
        degree: rng.random_range(0..=size as u32 + 1),
        depth: rng.random_range(0..=size as u32 + 1),
        steps,
        label,
        event,
    }
}

fn probonevert(a: &OracleArgs) -> Outcome {
    let seed = resolve_seed(a.common.seed);
    let reps = a.reps.unwrap_or(1000);
    let mut rng = rng_from_seed(seed);
    let events = [
        VertexEvent::LabelAtLeast,
        VertexEvent::LabelExactly,
        VertexEvent::NoLabel,
    ];
    let mut mismatches = 0;
    for i in 0..reps {
        let q = random_query(&mut rng, events[i % 3], 12);
        let (closed, enumerated) = verify_probonevert(&q)?;
        if closed != enumerated {
            eprintln!("mismatch: {q:?}: closed {closed}, enumerated {enumerated}");
            mismatches += 1;
        }
    }
    let pass = mismatches == 0;
    println!(
        "{reps} instances, {mismatches} mismatches: {}",
        verdict(pass)
    );
    Ok(pass)
}

fn product(a: &OracleArgs) -> Outcome {
    let seed = resolve_seed(a.common.seed);
    let reps = a.reps.unwrap_or(500);
    let mut rng = rng_from_seed(seed);
    let mut mismatches = 0;
    for _ in 0..reps {
        let k = rng.random_range(1..=3usize);
        let mut queries: Vec<OneVertexQuery> = Vec::with_capacity(k);
        let first = random_query(&mut rng, VertexEvent::LabelAtLeast, 0);
        let (n, t_n) = (first.n, first.t_n);
        let mut pool: Vec<u32> = (t_n..=n).collect();
        for _ in 0..k {
            let size = rng.random_range(0..=(18 / k).min(pool.len()));
            let steps: Vec<u32> = (0..size)
                .map(|_| pool.swap_remove(rng.random_range(0..pool.len())))
                .collect();
            queries.push(OneVertexQuery {
                n,
                t_n,
                degree: rng.random_range(0..=size as u32),
                depth: rng.random_range(0..=size as u32 + 1),
                label: rng.random_range(t_n..=n),
                steps,
                event: VertexEvent::LabelAtLeast,
            });
        }
        let (joint, prod) = verify_product_form(&queries)?;
        if joint != prod {
            eprintln!("mismatch: {queries:?}: joint {joint}, product {prod}");
            mismatches += 1;
        }
    }
    let pass = mismatches == 0;
    println!(
        "{reps} disjoint instances, {mismatches} mismatches: {}",
        verdict(pass)
    );
    Ok(pass)
}

fn labels(a: &OracleArgs) -> Outcome {
    let n = a.n.unwrap_or(5);
    let mut checked = 0;
    let mut wrong = 0;
    for k in 1..=3.min(n) {
        let mut tuple: Vec<Vertex> = vec![1; k];
        loop {
            let mut s = tuple.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() == k {
                let p = exact_label_prob(n, &tuple)?;
                let target = Prob::new(1, falling_factorial(n as u64, k as u64) as i128);
                if p != target {
                    eprintln!("labels {tuple:?}: {p} != {target}");
                    wrong += 1;
                }
                checked += 1;
            }
            let Some(pos) = tuple.iter().rposition(|&l| (l as usize) < n) else {
                break;
            };
            tuple[pos] += 1;
            tuple[pos + 1..].iter_mut().for_each(|l| *l = 1);
        }
    }
    let pass = wrong == 0;
    println!(
        "{checked} label tuples at n={n}, {wrong} differ from 1/(n)_k: {}",
        verdict(pass)
    );
    Ok(pass)
}

fn degprob(a: &OracleArgs) -> Outcome {
    let n = a.n.unwrap_or(5);
    let mut groups = 0;
    let mut bad = 0;
    for t_n in 2..=n as u32 {
        for k in 1..=2.min(n) {
            for d1 in 0..n as u32 {
                for d2 in 0..n as u32 {
                    let degrees = [d1, d2][..k].to_vec();
                    let target = Prob::new(1, 1i128 << degrees.iter().sum::<u32>());
                    for (sets, _, cond) in degree_prob_by_selection(n, t_n, &degrees)? {
                        groups += 1;
                        let in_a = predicate_a(&sets, &degrees, t_n)?;
                        let full = sets
                            .iter()
                            .zip(&degrees)
                            .all(|(s, &d)| s.len() >= d as usize);
                        let ok = in_a == !cond.is_zero()
                            && (!in_a || if full { cond == target } else { cond <= target });
                        if !ok {
                            eprintln!(
                                "t_n={t_n} d={degrees:?} J={sets:?}: P = {cond}, in A = {in_a}"
                            );
                            bad += 1;
                        }
                    }
                }
            }
        }
    }
    let pass = bad == 0;
    println!(
        "{groups} selection-set groups at n={n}, {bad} violations: {}",
        verdict(pass)
    );
    Ok(pass)
}

fn conditional(a: &OracleArgs) -> Outcome {
    let n = a.n.unwrap_or(4);
    let degrees = if a.degrees.is_empty() {
        vec![1]
    } else {
        a.degrees.clone()
    };
    let law = exact_conditional_law(n, &Condition::DegreeAtLeast(degrees))?;
    let pass = law.total() == Prob::new(1, 1);
    write_pmf_csv(a, 0, n, &law, |t| t.to_string())?;
    eprintln!(
        "{} outcomes, total probability 1: {}",
        law.len(),
        verdict(pass)
    );
    Ok(pass)
}
