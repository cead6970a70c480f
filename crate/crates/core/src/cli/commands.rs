//! One pipeline per subcommand: compute, write data files, fill the manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::carpet::{carpet_from, centroid_trace, dominant_frequency, worst_row_norm_error};
use crate::error::{Error, Result};
use crate::revival::{enumerate_fractional, fidelity_scan_from, write_predictions_json};
use crate::spectrum::{energy_level, reduced_energy, time_scales};
use crate::subplanck::{report, sensitivity_curve, subplanck_dimension, write_csv, SensitivityPoint, QUARTER_REVIVAL};
use crate::wavepacket::{evolve, expand, EigenExpansion};
use crate::wigner::{marginal_errors, negativity_volume, wigner_on, MARGINAL_TOLERANCE};
use crate::SystemConfig;

use super::config::{Format, RunConfig, Subcommand};
use super::manifest::Manifest;

/// Tolerance on the row integrals of a carpet.
pub const ROW_NORM_TOLERANCE: f64 = 1e-4;
/// Slack below the Heisenberg floor `A = 1/2` allowed for quadrature error.
pub const HEISENBERG_SLACK: f64 = 1e-6;

pub struct Outputs {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, file: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(file);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs `cmd`. Data files and the manifest are written even when a numerical
/// contract fails; the contract error is returned afterwards.
pub fn execute(cmd: Subcommand, cfg: &RunConfig, threads: usize) -> Result<Vec<PathBuf>> {
    cfg.validate(cmd)?;
    let mut resolved = cfg.clone();
    resolved.output.name = Some(cfg.name(cmd));
    if cmd == Subcommand::Wigner {
        resolved.wigner.p_max = Some(cfg.wigner.grid(&cfg.packet.spec()).p_max);
    }
    let expansion = expand(&cfg.packet.spec(), &cfg.system)?;
    if cmd == Subcommand::Spectrum {
        resolved.spectrum.n_levels = Some(cfg.spectrum.n_levels.unwrap_or(expansion.n_max));
    }

    let mut out = Outputs::new(&cfg.output.dir)?;
    let mut manifest = Manifest::new(cmd, &resolved, threads);
    manifest.number("captured_norm", expansion.captured_norm);
    manifest.result("n_min", expansion.n_min);
    manifest.result("n_max", expansion.n_max);
    manifest.result("n_bar", cfg.packet.n_bar());
    for w in expansion.warnings(&cfg.system) {
        manifest.result("warning", w);
    }

    let run = Run {
        cfg: &resolved,
        name: resolved.name(cmd),
        expansion: &expansion,
    };
    let verdict = match cmd {
        Subcommand::Spectrum => run.spectrum(&mut out, &mut manifest),
        Subcommand::Carpet => run.carpet(&mut out, &mut manifest),
        Subcommand::Wigner => run.wigner(&mut out, &mut manifest),
        Subcommand::Subplanck => run.subplanck(&mut out, &mut manifest),
        Subcommand::Revivals => run.revivals(&mut out, &mut manifest),
        Subcommand::Fidelity => run.fidelity(&mut out, &mut manifest),
    };
    let contract = match verdict {
        Ok(()) => None,
        Err(e @ Error::Contract(_)) => Some(e),
        Err(e) => return Err(e),
    };
    if let Some(e) = &contract {
        manifest.result("contract_failure", e);
    }
    let files: Vec<String> = out
        .written
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    manifest.push("outputs", files.join(","));
    out.write("manifest.txt", |w| manifest.write(w))?;
    match contract {
        Some(e) => Err(e),
        None => Ok(out.written),
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    name: String,
    expansion: &'a EigenExpansion,
}

impl Run<'_> {
    fn wants(&self, f: Format) -> bool {
        self.cfg.output.formats.contains(&f)
    }

    fn system(&self) -> &SystemConfig {
        &self.cfg.system
    }

    fn spectrum(&self, out: &mut Outputs, m: &mut Manifest) -> Result<()> {
        let n_levels = self.cfg.spectrum.n_levels.expect("resolved");
        let ts = time_scales(self.cfg.packet.n_bar(), self.system())?;
        let scales = [
            ("t_cl", Some(ts.t_cl)),
            ("t_cl_bar", Some(ts.t_cl_bar)),
            ("t_rev", Some(ts.t_rev)),
            ("t_rev_bar", Some(ts.t_rev_bar)),
            ("t_sr3", ts.t_sr3),
            ("t_sr4", ts.t_sr4),
        ];
        for (k, v) in scales {
            match v {
                Some(v) => m.number(k, v),
                None => m.result(k, "none"),
            }
        }
        if self.wants(Format::Csv) {
            let mut rows = Vec::with_capacity(n_levels as usize);
            for n in 1..=n_levels {
                let e = energy_level(n as i64, self.system())?;
                rows.push((n, e, reduced_energy(n, self.system().q_squared), self.expansion.coefficient(n).norm_sqr()));
            }
            out.write(&format!("{}.csv", self.name), |w| {
                writeln!(w, "n,energy,phase_rate,population")?;
                for (n, e, r, p) in &rows {
                    writeln!(w, "{n},{e:e},{r:e},{p:e}")?;
                }
                Ok(())
            })?;
            out.write(&format!("{}_timescales.csv", self.name), |w| {
                writeln!(w, "quantity,value")?;
                writeln!(w, "n_bar,{}", ts.n_bar)?;
                for (k, v) in scales {
                    writeln!(w, "{k},{}", v.map(|v| format!("{v:e}")).unwrap_or_default())?;
                }
                Ok(())
            })?;
        }
        Ok(())
    }

    fn carpet(&self, out: &mut Outputs, m: &mut Manifest) -> Result<()> {
        let c = &self.cfg.carpet;
        let field = carpet_from(self.expansion, self.system(), (c.t0, c.t1), c.nt, c.nx)?;
        let worst = worst_row_norm_error(&field, self.expansion.captured_norm);
        m.number("worst_row_norm_error", worst);
        let centroid = centroid_trace(&field)?;
        let ts = time_scales(self.cfg.packet.n_bar(), self.system())?;
        m.number("t_cl_bar", ts.t_cl_bar);
        if field.rows() >= 4 {
            let f = dominant_frequency(&field.axis1.points, &centroid)?;
            m.number("centroid_dominant_frequency", f);
            m.result("centroid_maxima", crate::carpet::count_local_maxima(&centroid));
        }
        if self.wants(Format::Csv) {
            out.write(&format!("{}.csv", self.name), |w| field.write_csv(w))?;
            out.write(&format!("{}_centroid.csv", self.name), |w| {
                writeln!(w, "time,centroid")?;
                for (t, x) in field.axis1.points.iter().zip(&centroid) {
                    writeln!(w, "{t:e},{x:e}")?;
                }
                Ok(())
            })?;
        }
        if self.wants(Format::Pgm) {
            out.write(&format!("{}.pgm", self.name), |w| field.write_pgm(w))?;
        }
        if worst > ROW_NORM_TOLERANCE {
            return Err(Error::Contract(format!(
                "carpet row integral deviates from the captured norm by {worst:e} (limit {ROW_NORM_TOLERANCE:e}); increase nx"
            )));
        }
        Ok(())
    }

    fn wigner(&self, out: &mut Outputs, m: &mut Manifest) -> Result<()> {
        let wc = &self.cfg.wigner;
        let state = evolve(self.expansion, wc.t, self.system())?;
        let grid = wc.grid(&self.cfg.packet.spec());
        let wf = wigner_on(&state, &grid)?;
        let errors = marginal_errors(&wf, &state)?;
        m.number("integral", wf.integral());
        m.number("negativity_volume", negativity_volume(&wf));
        m.number("min_value", wf.min_value);
        m.number("max_imag_residue", wf.max_imag_residue);
        m.result("fine_intervals", wf.quadrature.fine_intervals);
        m.number("max_half_range", wf.quadrature.max_half_range);
        m.number("position_marginal_error", errors.position);
        m.number("momentum_marginal_error", errors.momentum);
        m.number("normalization_error", errors.normalization);
        if self.wants(Format::Csv) {
            out.write(&format!("{}.csv", self.name), |w| wf.field.write_csv(w))?;
        }
        if self.wants(Format::Pgm) {
            out.write(&format!("{}.pgm", self.name), |w| wf.field.write_pgm(w))?;
        }
        if !errors.within(MARGINAL_TOLERANCE) {
            return Err(Error::Contract(format!(
                "Wigner marginals off: position {:e}, momentum {:e}, normalization {:e} (limit {MARGINAL_TOLERANCE:e}); \
                 a packet touching a wall needs a wider momentum range (--p-max, --np)",
                errors.position, errors.momentum, errors.normalization
            )));
        }
        Ok(())
    }

    fn subplanck(&self, out: &mut Outputs, m: &mut Manifest) -> Result<()> {
        let sc = &self.cfg.subplanck;
        let packet = self.cfg.packet.spec();
        let points = if sc.q2_list.is_empty() {
            let reference_cfg = SystemConfig { q_squared: 0.0, ..*self.system() };
            let reference = subplanck_dimension(&packet, &reference_cfg, QUARTER_REVIVAL)?;
            let r = report(&evolve(self.expansion, sc.t, self.system())?, sc.fringes)?;
            vec![SensitivityPoint {
                report: r,
                delta: r.dim_a / reference.dim_a,
            }]
        } else {
            sensitivity_curve(&packet, &sc.q2_list, sc.mode, self.system(), sc.fringes)?
        };
        m.result("points", points.len());
        if let [p] = points.as_slice() {
            m.number("action_A", p.report.action_a);
            m.number("dim_a", p.report.dim_a);
            m.number("delta_ratio", p.delta);
        }
        if self.wants(Format::Csv) {
            out.write(&format!("{}.csv", self.name), |w| write_csv(&points, w))?;
        }
        if let Some(p) = points.iter().find(|p| p.report.action_a < 0.5 - HEISENBERG_SLACK) {
            return Err(Error::Contract(format!(
                "action A = {} below the Heisenberg floor 1/2 at q^2 = {}, t = {}",
                p.report.action_a, p.report.q_squared, p.report.time
            )));
        }
        Ok(())
    }

    fn revivals(&self, out: &mut Outputs, m: &mut Manifest) -> Result<()> {
        let preds = enumerate_fractional(self.cfg.packet.n_bar(), self.system(), self.cfg.revivals.s_max)?;
        m.result("predictions", preds.len());
        out.write(&format!("{}.json", self.name), |w| {
            write_predictions_json(&preds, &mut *w)?;
            writeln!(w)
        })?;
        if self.wants(Format::Csv) {
            out.write(&format!("{}.csv", self.name), |w| {
                writeln!(w, "time,r1,s1,r2,s2,kind")?;
                for p in &preds {
                    let kind = serde_json::to_value(p.kind).map_err(std::io::Error::other)?;
                    writeln!(w, "{:e},{},{},{},{},{}", p.time, p.r1, p.s1, p.r2, p.s2, kind.as_str().unwrap_or_default())?;
                }
                Ok(())
            })?;
        }
        Ok(())
    }

    fn fidelity(&self, out: &mut Outputs, m: &mut Manifest) -> Result<()> {
        let f = &self.cfg.fidelity;
        let scan = fidelity_scan_from(self.expansion, self.system(), (f.t0, f.t1), f.nt)?;
        m.result("peaks", scan.peaks.len());
        if let Some(top) = scan.top_peak() {
            m.number("top_peak_time", top.time);
            m.number("top_peak_value", top.value);
        }
        if self.wants(Format::Csv) {
            out.write(&format!("{}.csv", self.name), |w| scan.write_csv(w))?;
            out.write(&format!("{}_peaks.csv", self.name), |w| {
                writeln!(w, "time,fidelity")?;
                for p in &scan.peaks {
                    writeln!(w, "{:e},{:e}", p.time, p.value)?;
                }
                Ok(())
            })?;
        }
        Ok(())
    }
}
