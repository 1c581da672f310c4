//! Test-instance generators writing program/data pairs with verdicts.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use dmtl_core::reductions::*;
use dmtl_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{read_file, GlobalOpts, EXIT_OK};

#[derive(Debug, Args)]
pub struct GenQbfArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Encode this QDIMACS file instead of random formulas.
    #[arg(long)]
    pub from: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub vars: usize,
    #[arg(long, default_value_t = 5)]
    pub clauses: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct GenCircuitArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Encode this circuit file instead of random circuits.
    #[arg(long)]
    pub from: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub gates: usize,
    #[arg(long, default_value_t = 3)]
    pub inputs: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into())
}

/// Writes `NAME.qdimacs`, `NAME.dmtl`, `NAME.facts` and `NAME.verdict.json`;
/// the pair is consistent iff the formula is false.
pub fn cmd_gen_qbf(a: &GenQbfArgs, g: &GlobalOpts, out: &mut dyn Write) -> Result<i32> {
    std::fs::create_dir_all(&a.out)?;
    let mut items = Vec::new();
    match &a.from {
        Some(f) => items.push((stem(f), Qbf::from_qdimacs(&read_file(f)?)?)),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            for i in 0..a.count {
                items.push((format!("qbf-{i}"), random_qbf(&mut rng, a.vars, a.clauses)));
            }
        }
    }
    for (name, q) in items {
        let (p, d) = qbf_to_program(&q);
        let value = qbf_eval(&q)?;
        write(&a.out, &format!("{name}.qdimacs"), &q.to_qdimacs())?;
        write(&a.out, &format!("{name}.dmtl"), &p.to_string())?;
        write(&a.out, &format!("{name}.facts"), &d.to_text(TimeFormat::Seconds))?;
        let verdict = json!({
            "qbf_value": value,
            "expected": if value { "INCONSISTENT" } else { "CONSISTENT" },
        });
        write(&a.out, &format!("{name}.verdict.json"), &(serde_json::to_string_pretty(&verdict)? + "\n"))?;
        writeln!(out, "{name}: {}", if value { "INCONSISTENT" } else { "CONSISTENT" })?;
    }
    Ok(EXIT_OK)
}

/// Writes `NAME.circuit`, `NAME.dmtl`, `NAME.facts` and `NAME.verdict.json`
/// with the goal fact whose entailment equals the circuit value.
pub fn cmd_gen_circuit(a: &GenCircuitArgs, g: &GlobalOpts, out: &mut dyn Write) -> Result<i32> {
    std::fs::create_dir_all(&a.out)?;
    let mut items = Vec::new();
    match &a.from {
        Some(f) => items.push((stem(f), MonotoneCircuit::parse(&read_file(f)?)?)),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let gates = a.gates.max(1);
            for i in 0..a.count {
                items.push((format!("circuit-{i}"), random_circuit(&mut rng, gates, a.inputs.clamp(1, gates))));
            }
        }
    }
    for (name, c) in items {
        let inst = circuit_to_program(&c);
        let value = circuit_eval(&c);
        write(&a.out, &format!("{name}.circuit"), &c.to_text())?;
        write(&a.out, &format!("{name}.dmtl"), &inst.program.to_string())?;
        write(&a.out, &format!("{name}.facts"), &inst.data.to_text(TimeFormat::Seconds))?;
        let verdict = json!({
            "value": value,
            "goal": format!("{}@{}", goal_atom(), inst.goal),
            "cap": 8 * c.scale(),
        });
        write(&a.out, &format!("{name}.verdict.json"), &(serde_json::to_string_pretty(&verdict)? + "\n"))?;
        writeln!(out, "{name}: {value}")?;
    }
    Ok(EXIT_OK)
}
