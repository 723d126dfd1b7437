//! Suite runner behind the `capelli` binary: configuration guards, suite
//! composition, rewrite-system caching and deterministic reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use capelli_core::algebras::{SystemSource, SystemStore};
use capelli_core::capelli::{
    error_report, merge_reports, validation_report, verify_idempotents, IdentityReport, Status, SystemRecord, Verifier,
    EQ1_CDET, EQ2_CLASSICAL, EQ3_IMMANANT, EQ6_QUANTUM, EQ7_CORCAP, IMMANANT_PROPS, MREA_EMBEDDING,
};
use capelli_core::combinatorics::{partitions, Carrier};
use capelli_core::rmatrix::{dj_rmatrix, load_rmatrix, RMatrix};
use capelli_core::scalars::Field;
use capelli_core::Error;
use serde::Serialize;

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "CAPELLI_CACHE_DIR";

pub const MAX_N: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Rmatrix,
    Classical,
    Idempotents,
    Quantum,
    Immanants,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RSource {
    Dj,
    File(PathBuf),
}

impl RSource {
    pub fn parse(s: &str) -> Self {
        if s == "dj" {
            RSource::Dj
        } else {
            RSource::File(PathBuf::from(s))
        }
    }

    fn label(&self) -> String {
        match self {
            RSource::Dj => "dj".into(),
            RSource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub suite: Suite,
    pub dim: usize,
    pub n: usize,
    /// `None` picks symbolic for `n <= 2` and `q0 = 2` otherwise.
    pub q: Option<String>,
    pub rmatrix: RSource,
    pub bound: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub force: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: Suite::All,
            dim: 2,
            n: 2,
            q: None,
            rmatrix: RSource::Dj,
            bound: None,
            cache_dir: None,
            jobs: None,
            force: false,
        }
    }
}

/// A configuration problem; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct ConfigError {
    pub message: String,
}

fn guard(ok: bool, message: impl Into<String>) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError { message: message.into() })
    }
}

impl RunConfig {
    pub fn field(&self) -> Result<Field, ConfigError> {
        match &self.q {
            None if self.n <= 2 => Ok(Field::Symbolic),
            None => Ok(Field::default_specialized()),
            Some(s) => Field::from_mode_str(s).map_err(|e| ConfigError { message: format!("--q {s}: {e}") }),
        }
    }

    fn runs(&self, s: Suite) -> bool {
        self.suite == s || self.suite == Suite::All
    }

    /// Hard caps and size guards; `--force` lifts the soft ones.
    pub fn validate(&self) -> Result<(), ConfigError> {
        guard((1..=MAX_N).contains(&self.dim), format!("--N {} outside 1..={MAX_N}", self.dim))?;
        guard((1..=MAX_N).contains(&self.n), format!("--n {} outside 1..={MAX_N}", self.n))?;
        if let Some(b) = self.bound {
            guard(b >= 2, "--bound must be at least 2")?;
        }
        if let Some(j) = self.jobs {
            guard(j >= 1, "--jobs must be at least 1")?;
        }
        let field = self.field()?;
        if self.force {
            return Ok(());
        }
        let hint = "; pass --force to run anyway";
        guard(
            !(field.is_symbolic() && self.n > 2),
            format!("symbolic q is limited to n <= 2 (got n = {}); use --q 2{hint}", self.n),
        )?;
        if self.runs(Suite::Classical) {
            guard(self.dim <= 3, format!("classical identities are limited to N <= 3{hint}"))?;
            guard(self.n <= 3, format!("classical identities are limited to n <= 3{hint}"))?;
            guard(!(self.n == 3 && self.dim > 2), format!("the immanant identity at n = 3 is limited to N <= 2{hint}"))?;
        }
        if self.runs(Suite::Quantum) || self.runs(Suite::Immanants) || self.runs(Suite::Idempotents) {
            guard(self.dim <= 2, format!("R-matrix identities are limited to N <= 2{hint}"))?;
            guard(self.n <= 3, format!("R-matrix identities are limited to n <= 3{hint}"))?;
        }
        Ok(())
    }

    fn echo(&self, field: &Field) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("suite".into(), format!("{:?}", self.suite).to_lowercase());
        m.insert("N".into(), self.dim.to_string());
        m.insert("n".into(), self.n.to_string());
        m.insert("q".into(), field.mode_str());
        m.insert("rmatrix".into(), self.rmatrix.label());
        m.insert("bound".into(), self.bound.map_or("auto".into(), |b| b.to_string()));
        m.insert("force".into(), self.force.to_string());
        m
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CacheStats {
    pub memory: usize,
    pub disk: usize,
    pub computed: usize,
    pub recomputed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub verified: usize,
    pub failed: usize,
    pub exit_code: i32,
}

/// Fields that legitimately differ between equivalent runs.
#[derive(Clone, Debug, Serialize)]
pub struct Runtime {
    pub wall_ms: u64,
    pub jobs: usize,
    pub cache: CacheStats,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub config: BTreeMap<String, String>,
    pub checks: Vec<IdentityReport>,
    pub systems: Vec<SystemRecord>,
    pub summary: Summary,
    pub runtime: Runtime,
}

impl SuiteReport {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with timing and runtime fields removed; equal for equivalent
    /// runs regardless of parallelism or cache state.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("runtime");
            if let Some(checks) = obj.get_mut("checks").and_then(|c| c.as_array_mut()) {
                for c in checks {
                    if let Some(c) = c.as_object_mut() {
                        c.remove("ms");
                    }
                }
            }
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let cfg: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "config: {}", cfg.join(" "));
        for c in &self.checks {
            let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let tag = if c.verified() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "[{tag}] {} {} compared={} rules={} ({} ms)", c.id, params.join(" "), c.compared, c.rules, c.ms);
            if let (Some(e), Some(r)) = (&c.entry, &c.residual) {
                let _ = writeln!(s, "       at {e}: {r}");
            }
            for n in &c.notes {
                let _ = writeln!(s, "       note: {n}");
            }
        }
        for sys in &self.systems {
            let _ = writeln!(s, "system {} bound={} rules={} audit={}", sys.preset, sys.bound, sys.rules, if sys.audit_ok { "ok" } else { "FAILED" });
        }
        let _ = writeln!(
            s,
            "summary: {} checks, {} verified, {} failed, exit {}",
            self.summary.total, self.summary.verified, self.summary.failed, self.summary.exit_code
        );
        s
    }
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Records the outcome of one check, turning engine errors into failed
/// reports.
fn push(checks: &mut Vec<IdentityReport>, id: &str, p: BTreeMap<String, String>, r: capelli_core::Result<IdentityReport>) {
    checks.push(match r {
        Ok(rep) => rep,
        Err(e) => error_report(id, p, &e),
    });
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    field: Field,
    verifier: Verifier<'a>,
    checks: Vec<IdentityReport>,
    rmatrix: Option<Result<RMatrix, Error>>,
}

impl<'a> Runner<'a> {
    /// The session R-matrix, validated once; `None` if validation failed
    /// (a failed check has then been recorded).
    fn rmatrix(&mut self) -> Option<RMatrix> {
        if self.rmatrix.is_none() {
            let loaded = match &self.cfg.rmatrix {
                RSource::Dj => dj_rmatrix(self.cfg.dim, &self.field),
                RSource::File(p) => load_rmatrix(p, &self.field),
            };
            let label = self.cfg.rmatrix.label();
            match &loaded {
                Ok(r) => self.checks.push(validation_report(r, &label)),
                Err(e) => push(
                    &mut self.checks,
                    capelli_core::capelli::RMATRIX_VALIDATION,
                    params(&[("source", label)]),
                    Err(e.clone()),
                ),
            }
            self.rmatrix = Some(loaded);
        }
        match &self.rmatrix {
            Some(Ok(r)) if r.is_valid() => Some(r.clone()),
            _ => None,
        }
    }

    fn classical(&mut self) {
        let (dim, n) = (self.cfg.dim, self.cfg.n);
        let r = self.eq1(dim);
        push(&mut self.checks, EQ1_CDET, params(&[("N", dim.to_string())]), r);
        let r = self.verifier.verify_capelli_classical(dim, n);
        push(&mut self.checks, EQ2_CLASSICAL, params(&[("N", dim.to_string()), ("n", n.to_string())]), r);
        for with_trace in [true, false] {
            let p = params(&[("N", dim.to_string()), ("n", n.to_string()), ("trace", with_trace.to_string())]);
            let parts: capelli_core::Result<Vec<_>> =
                partitions(n).iter().map(|l| self.verifier.verify_imm(l, None, dim, with_trace)).collect();
            push(&mut self.checks, EQ3_IMMANANT, p.clone(), parts.map(|parts| merge_reports(EQ3_IMMANANT, p, parts)));
        }
    }

    /// The shifted identity must verify and, for `N >= 2`, the variant
    /// without `K` must leave a nonzero residual.
    fn eq1(&self, dim: usize) -> capelli_core::Result<IdentityReport> {
        let mut rep = self.verifier.verify_cdet_capelli(dim, true)?;
        rep.params.remove("K");
        if dim >= 2 {
            let mutant = self.verifier.verify_cdet_capelli(dim, false)?;
            rep.compared += mutant.compared;
            match mutant.residual {
                Some(res) => rep.notes.push(format!("residual without K: {res}")),
                None if rep.verified() => {
                    rep.status = Status::Failed;
                    rep.entry = Some("variant without K".into());
                    rep.residual = Some("0 (expected a nonzero residual)".into());
                }
                None => {}
            }
        }
        Ok(rep)
    }

    fn idempotents(&mut self) {
        let (dim, n) = (self.cfg.dim, self.cfg.n);
        let r = verify_idempotents(&Carrier::Classical { n, dim });
        push(&mut self.checks, capelli_core::capelli::IDEMPOTENTS, params(&[("carrier", "classical".into())]), r);
        if let Some(rm) = self.rmatrix() {
            let r = verify_idempotents(&Carrier::Hecke { r: &rm, n });
            push(&mut self.checks, capelli_core::capelli::IDEMPOTENTS, params(&[("carrier", "hecke".into())]), r);
        }
    }

    fn quantum(&mut self) {
        let Some(rm) = self.rmatrix() else { return };
        let n = self.cfg.n;
        let q = self.field.mode_str();
        let r = self.verifier.verify_capelli_quantum(&rm, n);
        push(&mut self.checks, EQ6_QUANTUM, params(&[("n", n.to_string()), ("q", q.clone())]), r);
        let p = params(&[("N", rm.dim().to_string()), ("n", n.to_string()), ("q", q.clone())]);
        let parts: capelli_core::Result<Vec<_>> =
            partitions(n).iter().map(|l| self.verifier.verify_corcap(&rm, l, None)).collect();
        push(&mut self.checks, EQ7_CORCAP, p.clone(), parts.map(|parts| merge_reports(EQ7_CORCAP, p, parts)));
        let r = self.verifier.verify_mrea_embedding(&rm);
        push(&mut self.checks, MREA_EMBEDDING, params(&[("q", q)]), r);
    }

    fn immanants(&mut self) {
        let Some(rm) = self.rmatrix() else { return };
        let n = self.cfg.n;
        for l in partitions(n) {
            let r = self.verifier.verify_immanant_properties(&rm, &l, n <= 2);
            push(&mut self.checks, IMMANANT_PROPS, params(&[("lambda", l.to_string())]), r);
        }
    }
}

/// Runs the configured suites in dependency order. Configuration errors
/// are returned before any work starts.
pub fn run(cfg: &RunConfig) -> Result<SuiteReport, ConfigError> {
    cfg.validate()?;
    let field = cfg.field()?;
    let jobs = cfg.jobs.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .stack_size(64 << 20)
        .build()
        .map_err(|e| ConfigError { message: format!("thread pool: {e}") })?;
    let start = Instant::now();
    let store = SystemStore::new(cfg.cache_dir.clone());
    let (checks, records) = pool.install(|| {
        let mut runner = Runner {
            cfg,
            field: field.clone(),
            verifier: Verifier::new(&store, cfg.bound),
            checks: Vec::new(),
            rmatrix: None,
        };
        if cfg.runs(Suite::Rmatrix) {
            runner.rmatrix();
        }
        if cfg.runs(Suite::Classical) {
            runner.classical();
        }
        if cfg.runs(Suite::Idempotents) {
            runner.idempotents();
        }
        if cfg.runs(Suite::Quantum) {
            runner.quantum();
        }
        if cfg.runs(Suite::Immanants) {
            runner.immanants();
        }
        (runner.checks, runner.verifier.records())
    });
    let mut cache = CacheStats::default();
    let mut warnings = Vec::new();
    for r in &records {
        match &r.source {
            SystemSource::Memory => cache.memory += 1,
            SystemSource::Disk => cache.disk += 1,
            SystemSource::Computed => cache.computed += 1,
            SystemSource::Recomputed(why) => {
                cache.recomputed += 1;
                warnings.push(format!("cache for {} rejected ({why}); recomputed", r.preset));
            }
        }
    }
    let verified = checks.iter().filter(|c| c.verified()).count();
    let audits_ok = records.iter().all(|r| r.audit_ok);
    let failed = checks.len() - verified;
    let summary = Summary {
        total: checks.len(),
        verified,
        failed,
        exit_code: if failed == 0 && audits_ok { 0 } else { 1 },
    };
    Ok(SuiteReport {
        config: cfg.echo(&field),
        checks,
        systems: records,
        summary,
        runtime: Runtime { wall_ms: start.elapsed().as_millis() as u64, jobs, cache, warnings },
    })
}
