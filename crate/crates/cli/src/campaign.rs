//! Seeded repeat runs per system, summarised as mean and sample standard deviation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use bpde_core::run_bpde;

use crate::error::{from_bpde, CliError, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::oracle::casci;
use crate::problem::{load_problem, read_text, write_atomic};
use crate::units::hartree_to_cm1;
use crate::{BackendArg, CampaignArgs, ConfigArgs, ModeArg, RuleArg};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub run: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub label: Option<String>,
    /// Relative paths resolve against the manifest's directory.
    pub ints: PathBuf,
    pub d0: String,
    pub d1: String,
    #[serde(default)]
    pub freeze: Vec<usize>,
    pub repeats: Option<usize>,
    pub shots: Option<u64>,
    pub scan: Option<usize>,
    pub mode: Option<ModeArg>,
    pub seed: Option<u64>,
    pub backend: Option<BackendArg>,
    pub workers: Option<usize>,
    pub trotter_rule: Option<RuleArg>,
    pub max_iterations: Option<usize>,
}

impl ManifestEntry {
    fn config(&self) -> ConfigArgs {
        ConfigArgs {
            shots: self.shots,
            scan: self.scan,
            mode: self.mode,
            seed: self.seed,
            backend: self.backend,
            workers: self.workers,
            trotter_rule: self.trotter_rule,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignEntry {
    pub label: String,
    pub ints: PathBuf,
    pub d0: String,
    pub d1: String,
    pub freeze: Vec<usize>,
    pub repeats: usize,
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub label: String,
    pub n_qubits: Option<usize>,
    pub repeats: usize,
    pub seeds: Vec<u64>,
    pub gaps_hartree: Vec<f64>,
    pub converged: usize,
    pub failures: Vec<String>,
    /// Reference-determinant estimate `<d1|H|d1> - <d0|H|d0>`.
    pub reference_gap_hartree: Option<f64>,
    pub mean_gap_hartree: Option<f64>,
    pub std_gap_hartree: Option<f64>,
    pub e_thre: Option<f64>,
    pub casci_gap_hartree: Option<f64>,
    pub ratio: Option<f64>,
    /// Why no exact gap is available.
    pub oracle_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub rows: Vec<CampaignRow>,
}

pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<CampaignEntry>, String> {
    let m: Manifest = toml::from_str(text).map_err(|e| e.to_string())?;
    Ok(m.run
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let ints = if e.ints.is_relative() { base_dir.join(&e.ints) } else { e.ints.clone() };
            CampaignEntry {
                label: e.label.clone().unwrap_or_else(|| format!("run{i}")),
                config: e.config(),
                repeats: e.repeats.unwrap_or(0),
                ints,
                d0: e.d0,
                d1: e.d1,
                freeze: e.freeze,
            }
        })
        .collect())
}

fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

/// Runs one system. Setup errors fail the whole row; per-repeat errors are recorded.
pub fn run_entry(entry: &CampaignEntry) -> CampaignRow {
    let mut row = CampaignRow {
        label: entry.label.clone(),
        n_qubits: None,
        repeats: entry.repeats,
        seeds: Vec::new(),
        gaps_hartree: Vec::new(),
        converged: 0,
        failures: Vec::new(),
        reference_gap_hartree: None,
        mean_gap_hartree: None,
        std_gap_hartree: None,
        e_thre: None,
        casci_gap_hartree: None,
        ratio: None,
        oracle_note: None,
    };
    let problem = match load_problem(&entry.ints, &entry.d0, &entry.d1, &entry.freeze) {
        Ok(p) => p,
        Err(e) => {
            row.failures.push(e.to_string());
            return row;
        }
    };
    row.n_qubits = Some(problem.ints.n_orb());
    let base = entry.config.to_config(problem.h00);
    for r in 0..entry.repeats {
        let cfg = bpde_core::BpdeConfig {
            seed: base.seed.wrapping_add(r as u64),
            ..base.clone()
        };
        row.seeds.push(cfg.seed);
        match run_bpde(&problem.ints, &problem.d0, &problem.d1, &cfg) {
            Ok(res) => {
                row.reference_gap_hartree = Some(res.mu_ini);
                row.e_thre = Some(row.e_thre.map_or(res.e_thre, |e: f64| e.max(res.e_thre)));
                if res.converged {
                    row.converged += 1;
                } else {
                    row.failures.push(format!("seed {}: not converged", cfg.seed));
                }
                row.gaps_hartree.push(res.gap);
            }
            Err(e) => row.failures.push(format!("seed {}: {}", cfg.seed, from_bpde("run", e))),
        }
    }
    (row.mean_gap_hartree, row.std_gap_hartree) = mean_std(&row.gaps_hartree);
    match casci(&problem) {
        Ok((g, _)) => {
            row.casci_gap_hartree = Some(g.gap);
            row.ratio = row.mean_gap_hartree.map(|m| m / g.gap).filter(|r| r.is_finite());
        }
        Err(e) => row.oracle_note = Some(e.to_string()),
    }
    row
}

fn cm1(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{:.2}", hartree_to_cm1(x)))
}

pub fn render_table(report: &CampaignReport) -> String {
    let mut out = format!(
        "{:<16} {:>6} {:>14} {:>26} {:>14} {:>8} {:>6}\n",
        "system", "qubits", "dE_ref/cm-1", "dE_BPDE +- std/cm-1", "dE_CASCI/cm-1", "ratio", "ok"
    );
    for r in &report.rows {
        let bpde = match (r.mean_gap_hartree, r.std_gap_hartree) {
            (Some(m), Some(s)) => format!("{:.2} +- {:.2}", hartree_to_cm1(m), hartree_to_cm1(s)),
            _ => "-".into(),
        };
        out.push_str(&format!(
            "{:<16} {:>6} {:>14} {:>26} {:>14} {:>8} {:>6}\n",
            r.label,
            r.n_qubits.map_or("-".into(), |n| n.to_string()),
            cm1(r.reference_gap_hartree),
            bpde,
            cm1(r.casci_gap_hartree),
            r.ratio.map_or("-".into(), |x| format!("{x:.5}")),
            format!("{}/{}", r.converged, r.repeats),
        ));
    }
    out
}

pub fn campaign_entries(args: &CampaignArgs) -> Result<Vec<CampaignEntry>, CliError> {
    let mut entries = match (&args.manifest, &args.ints) {
        (Some(path), _) => {
            let text = read_text(path)?;
            let dir = path.parent().unwrap_or(Path::new("."));
            parse_manifest(&text, dir).map_err(|e| CliError::input(path.display().to_string(), e))?
        }
        (None, Some(ints)) => vec![CampaignEntry {
            label: ints.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()),
            ints: ints.clone(),
            d0: args.d0.clone().unwrap_or_default(),
            d1: args.d1.clone().unwrap_or_default(),
            freeze: args.freeze.clone(),
            repeats: 0,
            config: ConfigArgs::default(),
        }],
        (None, None) => Vec::new(),
    };
    for e in &mut entries {
        if e.repeats == 0 {
            e.repeats = args.repeats;
        }
        e.config = e.config.or(&args.config);
    }
    if entries.is_empty() {
        return Err(CliError::EmptyCampaign);
    }
    if entries.iter().any(|e| e.repeats == 0) {
        return Err(CliError::Usage("--repeats must be positive".into()));
    }
    Ok(entries)
}

pub fn cmd_campaign(args: &CampaignArgs) -> Result<u8, CliError> {
    let entries = campaign_entries(args)?;
    let rows: Vec<CampaignRow> = entries
        .iter()
        .map(|e| {
            let row = run_entry(e);
            for f in &row.failures {
                eprintln!("{}: {f}", row.label);
            }
            row
        })
        .collect();
    let report = CampaignReport { rows };
    print!("{}", render_table(&report));
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        write_atomic(path, &json)?;
    }
    let clean = report.rows.iter().all(|r| r.failures.is_empty() && r.converged == r.repeats);
    Ok(if clean { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
