//! Subcommands of the `monoflow` binary, kept in a library so tests can call them.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use monoflow::checks::{verify, PeriodicExtras, VerifyReport};
use monoflow::config::{ConfigFile, Experiment};
use monoflow::convergence::{convergence_study, ConvergenceRow, ReferenceSpec};
use monoflow::dislocation::{rescale_experiment, summarize_periodic, RescaleRow};
use monoflow::estimates::MonitorReport;
use monoflow::{run, RunConfig, RunOutput};

/// Fixed rendering for every float written to CSV: 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

pub fn load_experiment(config_path: &Path) -> Result<(ConfigFile, Experiment)> {
    let file = ConfigFile::load(config_path)?;
    let experiment = file.build().with_context(|| format!("{}", config_path.display()))?;
    Ok((file, experiment))
}

/// One snapshot per block of rows: `t, x, u_1..m`.
pub fn write_fields_csv(path: &Path, output: &RunOutput) -> Result<()> {
    let m = output.initial.m();
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string(), "x".to_string()];
    header.extend((1..=m).map(|i| format!("u_{i}")));
    w.write_record(&header)?;
    for s in &output.snapshots {
        let xs = s.field.grid().nodes();
        for (j, x) in xs.iter().enumerate() {
            let mut row = vec![num(s.t), num(*x)];
            row.extend((0..m).map(|i| num(s.field.component(i)[j])));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_monitors_csv(path: &Path, monitors: &[MonitorReport], m: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("linf_{i}")));
    header.extend((1..=m).map(|i| format!("l1grad_{i}")));
    header.extend(
        [
            "entropy_n",
            "dissipation_d",
            "cum_dissipation",
            "gradsum_sup",
            "mono_min",
            "box_excursion",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for r in monitors {
        let mut row = vec![num(r.t)];
        row.extend(r.linf.iter().map(|v| num(*v)));
        row.extend(r.l1grad.iter().map(|v| num(*v)));
        row.extend(
            [
                r.entropy_n,
                r.dissipation_d,
                r.cum_dissipation,
                r.gradsum_sup,
                r.mono_min,
                r.box_excursion,
            ]
            .map(num),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// What a single run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub fields_csv: PathBuf,
    pub monitors_csv: PathBuf,
    pub report: VerifyReport,
    pub warnings: Vec<String>,
}

fn run_and_check(experiment: &Experiment) -> Result<(RunConfig, RunOutput, VerifyReport)> {
    match experiment {
        Experiment::Standard { config, .. } => {
            let output = run(config)?;
            let report = verify(config, &output, None);
            Ok((config.clone(), output, report))
        }
        Experiment::Periodic { spec, config, .. } => {
            let output = run(config)?;
            let summary = summarize_periodic(config, output, spec.period);
            let extras = PeriodicExtras {
                drift_rate: summary.drift_rate,
                mean_drift: summary.max_mean_drift,
            };
            let report = verify(config, &summary.output, Some(extras));
            Ok((config.clone(), summary.output, report))
        }
        Experiment::Rescale { .. } => {
            bail!("this configuration describes a rescale experiment; use `dislocation rescale`")
        }
    }
}

/// Runs the configuration and writes its fields and monitors CSV into `out_dir`.
pub fn cmd_run(config_path: &Path, out_dir: &Path) -> Result<RunSummary> {
    let (file, experiment) = load_experiment(config_path)?;
    let (config, output, report) = run_and_check(&experiment)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let fields_csv = out_dir.join(&file.outputs.fields_csv);
    let monitors_csv = out_dir.join(&file.outputs.monitors_csv);
    write_fields_csv(&fields_csv, &output)?;
    write_monitors_csv(&monitors_csv, &output.monitors, config.system.m())?;
    Ok(RunSummary {
        fields_csv,
        monitors_csv,
        report,
        warnings: output.warnings,
    })
}

/// Runs the configuration and evaluates the invariant suite without writing files.
pub fn cmd_verify(config_path: &Path) -> Result<(VerifyReport, Vec<String>)> {
    let (_, experiment) = load_experiment(config_path)?;
    let (_, output, report) = run_and_check(&experiment)?;
    Ok((report, output.warnings))
}

/// Parses `a,b,c` into cell counts.
pub fn parse_refine(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .with_context(|| format!("bad refinement level {p:?}"))
        })
        .collect()
}

/// Refinement study; levels default to n, 2n, 4n, 8n of the configured grid.
pub fn cmd_converge(config_path: &Path, refine: Option<&[usize]>) -> Result<Vec<ConvergenceRow>> {
    let (_, experiment) = load_experiment(config_path)?;
    let Experiment::Standard { config, reference } = experiment else {
        bail!("convergence studies take a standard (non-dislocation) configuration");
    };
    let Some(reference) = reference else {
        bail!("the configuration names no reference; add e.g. {{\"kind\": \"fine_reference\", \"refine\": 4}}");
    };
    if matches!(reference, ReferenceSpec::FineReference { .. }) {
        log::info!("computing the fine-grid reference first");
    }
    let n = config.grid.cells();
    let levels = refine.map_or_else(|| vec![n, 2 * n, 4 * n, 8 * n], <[usize]>::to_vec);
    Ok(convergence_study(&config, &levels, &reference)?)
}

pub fn write_converge_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["n", "eps", "error", "order"])?;
    for r in rows {
        let order = r.order.map_or_else(String::new, |o| match o {
            monoflow::convergence::Order::Value(v) => num(v),
            other => other.to_string(),
        });
        w.write_record([r.n.to_string(), num(r.eps), num(r.error), order])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_rescale(config_path: &Path) -> Result<Vec<RescaleRow>> {
    let (_, experiment) = load_experiment(config_path)?;
    let Experiment::Rescale { spec, profiles, params } = experiment else {
        bail!("the configuration has no `rescale` block");
    };
    Ok(rescale_experiment(&spec, &profiles, &params)?)
}

pub fn write_rescale_csv(path: &Path, rows: &[RescaleRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["delta", "n", "nonlocal_sup", "distance"])?;
    for r in rows {
        w.write_record([num(r.delta), r.n.to_string(), num(r.nonlocal_sup), num(r.distance)])?;
    }
    w.flush()?;
    Ok(())
}

/// Kinds of CSV the plot command knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Fields,
    Monitors,
    Table,
}

fn csv_kind(header: &str) -> CsvKind {
    if header.starts_with("t,x,") {
        CsvKind::Fields
    } else if header.starts_with("t,") {
        CsvKind::Monitors
    } else {
        CsvKind::Table
    }
}

const FIELDS_SCRIPT: &str = r#"import os
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(os.path.join(os.path.dirname(os.path.abspath(__file__)), "{CSV}"))
times = sorted(df["t"].unique())
picks = [times[round(k * (len(times) - 1) / 4)] for k in range(5)]
cols = [c for c in df.columns if c.startswith("u_")]
fig, axes = plt.subplots(len(cols), 1, sharex=True, squeeze=False)
for ax, c in zip(axes[:, 0], cols):
    for t in picks:
        s = df[df["t"] == t]
        ax.plot(s["x"], s[c], label=f"t = {t:.3g}")
    ax.set_ylabel(c)
axes[0, 0].legend()
axes[-1, 0].set_xlabel("x")
plt.savefig(os.path.join(os.path.dirname(os.path.abspath(__file__)), "{STEM}.png"), dpi=150)
"#;

const MONITORS_SCRIPT: &str = r#"import os
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(os.path.join(os.path.dirname(os.path.abspath(__file__)), "{CSV}"))
cols = [c for c in df.columns if c != "t"]
fig, axes = plt.subplots(len(cols), 1, sharex=True, figsize=(6, 1.6 * len(cols)))
for ax, c in zip(axes, cols):
    ax.plot(df["t"], df[c])
    ax.set_ylabel(c, fontsize=7)
axes[-1].set_xlabel("t")
plt.tight_layout()
plt.savefig(os.path.join(os.path.dirname(os.path.abspath(__file__)), "{STEM}.png"), dpi=150)
"#;

const TABLE_SCRIPT: &str = r#"import os
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(os.path.join(os.path.dirname(os.path.abspath(__file__)), "{CSV}"))
x = df.columns[0]
for c in df.columns[1:]:
    if pd.api.types.is_numeric_dtype(df[c]):
        plt.loglog(df[x], df[c], "o-", label=c)
plt.xlabel(x)
plt.legend()
plt.savefig(os.path.join(os.path.dirname(os.path.abspath(__file__)), "{STEM}.png"), dpi=150)
"#;

/// Writes `<stem>.py` next to the CSV; the script locates the CSV relative to itself.
pub fn cmd_plot(csv_path: &Path) -> Result<(PathBuf, CsvKind)> {
    let file = File::open(csv_path).with_context(|| format!("opening {}", csv_path.display()))?;
    let mut header = String::new();
    BufReader::new(file).read_line(&mut header)?;
    if header.trim().is_empty() {
        bail!("{} has no header row", csv_path.display());
    }
    let kind = csv_kind(header.trim_end());
    let name = csv_path
        .file_name()
        .and_then(|n| n.to_str())
        .context("CSV path has no usable file name")?;
    let stem = csv_path
        .file_stem()
        .and_then(|n| n.to_str())
        .context("CSV path has no usable file name")?;
    let template = match kind {
        CsvKind::Fields => FIELDS_SCRIPT,
        CsvKind::Monitors => MONITORS_SCRIPT,
        CsvKind::Table => TABLE_SCRIPT,
    };
    let script = template.replace("{CSV}", name).replace("{STEM}", stem);
    let out = csv_path.with_extension("py");
    let mut f = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    f.write_all(script.as_bytes())?;
    Ok((out, kind))
}
