//! CSV plot data. Each kind is regenerated from the configuration echoed in
//! the report of a previous `verify` run in the same directory.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use superkvn::kernels::{endpoint_grid, kernel_compare, DiscretizedAction};
use superkvn::kvn::{evolve_wave, KvNWave};
use superkvn::ring::qi_int;
use superkvn::sampling::random_potential;
use superkvn::superfield::SuperPath;
use superkvn::vierbein::{epsilon_sweep, write_sweep_csv, QuantumTarget, Sign};

use crate::config::{Suite, SuiteConfig};
use crate::report::Report;
use crate::suites::{check_rng, reference_block, BLOB};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmitKind {
    /// `q,p,re_psi,im_psi,rho` for the wave at the end of the trajectory.
    #[value(name = "wave_snapshot", alias = "wave-snapshot")]
    WaveSnapshot,
    /// `q0,q1,abs_discrete,abs_oracle,rel_error` for the oscillator kernel.
    #[value(name = "kernel_table", alias = "kernel-table")]
    KernelTable,
    /// `eps,classical_residual,quantum_residual` along the ε sweep.
    #[value(name = "epsilon_sweep", alias = "epsilon-sweep")]
    EpsilonSweep,
}

impl EmitKind {
    pub const ALL: [EmitKind; 3] = [EmitKind::WaveSnapshot, EmitKind::KernelTable, EmitKind::EpsilonSweep];

    pub fn name(self) -> &'static str {
        match self {
            EmitKind::WaveSnapshot => "wave_snapshot",
            EmitKind::KernelTable => "kernel_table",
            EmitKind::EpsilonSweep => "epsilon_sweep",
        }
    }

    /// The suite whose run produces this kind.
    pub fn suite(self) -> Suite {
        match self {
            EmitKind::WaveSnapshot => Suite::Kvn,
            EmitKind::KernelTable => Suite::Kernels,
            EmitKind::EpsilonSweep => Suite::Vierbein,
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

/// CSV text for `kind` under `cfg`.
pub fn generate(kind: EmitKind, cfg: &SuiteConfig) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    let s = |e: &dyn std::fmt::Display| e.to_string();
    match kind {
        EmitKind::WaveSnapshot => {
            let (center, sigma, k) = BLOB;
            let w = KvNWave::gaussian(cfg.grid, center, sigma, k).map_err(|e| s(&e))?;
            let out = evolve_wave(&cfg.hamiltonian, &w, cfg.grid.total_time).map_err(|e| s(&e))?;
            out.write_csv(&mut buf).map_err(|e| s(&e))?;
        }
        EmitKind::KernelTable => {
            let spec = DiscretizedAction::harmonic(cfg.slices, cfg.kernel_time, cfg.omega);
            let cmp = kernel_compare(&spec, &endpoint_grid(1.5, 7)).map_err(|e| s(&e))?;
            cmp.write_csv(&mut buf).map_err(|e| s(&e))?;
        }
        EmitKind::EpsilonSweep => {
            let mut rng = check_rng(cfg.seed, 601);
            let path = SuperPath::random(1, cfg.path_degree, &mut rng);
            let v = random_potential(4, &mut rng);
            let eps: Vec<_> = cfg.epsilon.iter().map(|e| e.value.clone()).collect();
            let rows = epsilon_sweep(
                &reference_block(),
                Sign::Plus,
                &cfg.hbar.value,
                QuantumTarget::Interpolating,
                &eps,
                &v,
                &path,
                &qi_int(0),
                &qi_int(1),
            )
            .map_err(|e| s(&e))?;
            write_sweep_csv(&rows, &mut buf).map_err(|e| s(&e))?;
        }
    }
    Ok(buf)
}

/// Report path for `suite` inside `dir`.
pub fn report_path(dir: &Path, suite: Suite) -> PathBuf {
    dir.join(format!("{suite}.report.json"))
}

/// Loads the report that covers `kind`: the suite's own, or `all`.
pub fn prior_report(kind: EmitKind, dir: &Path) -> Result<Report, CliError> {
    for suite in [kind.suite(), Suite::All] {
        let p = report_path(dir, suite);
        if p.exists() {
            let text = std::fs::read_to_string(&p)?;
            return Report::from_json(&text)
                .map_err(|e| CliError::MissingOutput(format!("{}: unreadable report: {e}", p.display())));
        }
    }
    Err(CliError::MissingOutput(format!(
        "no {} or all report in {}; run `superkvn verify {}` first",
        kind.suite(),
        dir.display(),
        kind.suite()
    )))
}

/// Regenerates `kind` from the prior run in `dir` and writes `dir/<kind>.csv`.
pub fn emit_plot_data(kind: EmitKind, dir: &Path) -> Result<PathBuf, CliError> {
    let report = prior_report(kind, dir)?;
    let mut cfg = SuiteConfig::new(kind.suite());
    cfg.apply(&report.body.config)?;
    cfg.out = dir.to_path_buf();
    let data = generate(kind, &cfg).map_err(CliError::Emit)?;
    let path = dir.join(kind.file_name());
    std::fs::write(&path, data)?;
    Ok(path)
}
