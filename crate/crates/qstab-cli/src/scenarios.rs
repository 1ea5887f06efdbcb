//! Scenario runners.  Every scenario turns a parsed config into a
//! `RunReport`: flat measurement rows, plot-ready long-format points,
//! witnesses, and verdicts.  Reports are deterministic functions of
//! (config, seed); wall-clock accounting lives outside the hashed tables.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use qstab::group_spaces::{orbit_map, GroupError};
use qstab::metric_core::{GraphError, MetricGraph};
use qstab::relhyp::{cusp_space, default_depth_cap, PeripheralStructure, RelHypError};
use qstab::stability_lab::{
    contraction_profile, property5_constant, recurrence_constant, stability_constant, QgParams,
    RecurrenceProfile, StabilityError, StabilityMode,
};

use crate::cache::Cache;
use crate::config::{ExperimentConfig, Scenario, StabilityModeCfg};
use crate::spaces::{
    ball_from_text, ball_to_text, build_space, radius_for_wordlen, reference_geodesic,
    tiling_from_text, tiling_to_text, Space, SpaceSpec,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config invalid: {0}")]
    Config(String),
    #[error("space construction failed: {0}")]
    Space(String),
    #[error("estimator failed: {0}")]
    Lib(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<StabilityError> for RunError {
    fn from(e: StabilityError) -> Self {
        RunError::Lib(e.to_string())
    }
}
impl From<GroupError> for RunError {
    fn from(e: GroupError) -> Self {
        RunError::Lib(e.to_string())
    }
}
impl From<GraphError> for RunError {
    fn from(e: GraphError) -> Self {
        RunError::Lib(e.to_string())
    }
}
impl From<RelHypError> for RunError {
    fn from(e: RelHypError) -> Self {
        RunError::Lib(e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for independent grid items (1 = sequential).
    pub threads: usize,
    /// Hard wall-clock budget; overrides the config when set.
    pub budget_seconds: Option<u64>,
    pub no_cache: bool,
    /// Output directory override.
    pub output: Option<PathBuf>,
    /// Cache override (tests); defaults to `Cache::from_env(no_cache)`.
    pub cache: Option<Cache>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub quantity: String,
    pub param_1: String,
    pub param_2: String,
    pub value: String,
    pub witness_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlotRow {
    pub quantity: String,
    pub x: f64,
    pub y: f64,
    pub series: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    /// Failing a must-hold verdict gives the dedicated exit status.
    pub must_hold: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub id: String,
    pub kind: String,
    /// Compact vertex-path encoding `v0-v1-…`, or `none`.
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub config_hash: String,
    pub config_echo: String,
    pub rows: Vec<TableRow>,
    pub plot: Vec<PlotRow>,
    pub verdicts: Vec<Verdict>,
    pub witnesses: Vec<Witness>,
    pub output: PathBuf,
    pub wall_ms: u128,
    pub budget_exceeded: bool,
    pub incomplete: bool,
    pub cache_hits: usize,
    pub cache_rebuilds: usize,
}

impl RunReport {
    pub fn failed_must_hold(&self) -> bool {
        self.verdicts.iter().any(|v| v.must_hold && !v.holds)
    }
}

/// Output of one independent grid item, merged in input order.
#[derive(Debug, Default)]
struct ItemOut {
    rows: Vec<TableRow>,
    plot: Vec<PlotRow>,
    /// (kind, detail) pairs; ids are assigned at aggregation.  Rows refer
    /// to witnesses by local index encoded as `@k`.
    witnesses: Vec<(String, String)>,
    verdicts: Vec<Verdict>,
}

impl ItemOut {
    fn witness(&mut self, kind: &str, verts: Option<&[u32]>) -> String {
        let detail = match verts {
            Some(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-"),
            None => "none".into(),
        };
        self.witnesses.push((kind.to_string(), detail));
        format!("@{}", self.witnesses.len() - 1)
    }
}

/// Ordered parallel map with a deadline: workers pull indices from a shared
/// counter; items not started before the deadline yield `None`.
fn par_map<T, F>(items: &[T], threads: usize, deadline: Option<Instant>, f: F) -> Vec<Option<Result<ItemOut, RunError>>>
where
    T: Sync,
    F: Fn(&T) -> Result<ItemOut, RunError> + Sync,
{
    let n = items.len();
    let threads = threads.max(1).min(n.max(1));
    let counter = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<ItemOut, RunError>>>> =
        Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = counter.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    continue; // budget spent: skip, leaving the slot None
                }
                let out = f(&items[i]);
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots.into_inner().unwrap()
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    cache: Cache,
    cache_hits: AtomicUsize,
    cache_rebuilds: AtomicUsize,
}

impl Runner<'_> {
    /// The ball radius (or corona count) hosting a reference geodesic of
    /// endpoint distance `len` inside the trusted margin.
    fn size_for_length(&self, len: u32) -> u32 {
        match &self.cfg.space {
            SpaceSpec::Group(_) => radius_for_wordlen(len - len / 2),
            SpaceSpec::Tiling { .. } => self.cfg.layers,
        }
    }

    fn space(&self, size: u32) -> Result<Space, RunError> {
        let desc = format!("space={} size={size}", self.cfg.space);
        let spec = self.cfg.space.clone();
        let cap = self.cfg.vertex_cap;
        let outcome = self.cache.get_or_build::<RunError>(&desc, || {
            let s = build_space(&spec, size, cap).map_err(RunError::Space)?;
            Ok(match &s {
                Space::Ball(b) => ball_to_text(b),
                Space::Tiling(t) => tiling_to_text(t),
            })
        })?;
        if outcome.from_cache {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
        }
        if outcome.rebuilt_corrupt {
            self.cache_rebuilds.fetch_add(1, Ordering::Relaxed);
        }
        match &self.cfg.space {
            SpaceSpec::Group(_) => {
                Ok(Space::Ball(ball_from_text(&outcome.payload).map_err(RunError::Space)?))
            }
            SpaceSpec::Tiling { .. } => {
                Ok(Space::Tiling(tiling_from_text(&outcome.payload).map_err(RunError::Space)?))
            }
        }
    }

    /// Cusp-space graph over a cached ball, itself cached as adjacency text.
    fn cusp_graph(&self, radius: u32) -> Result<MetricGraph, RunError> {
        let peri: Vec<String> = self
            .cfg
            .peripherals
            .iter()
            .map(|p| p.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("."))
            .collect();
        let desc = format!(
            "cusp space={} size={radius} peripherals={}",
            self.cfg.space,
            peri.join("|")
        );
        let outcome = self.cache.get_or_build::<RunError>(&desc, || {
            let Space::Ball(ball) = self.space(radius)? else {
                return Err(RunError::Config("cusp spaces need a group, not a tiling".into()));
            };
            let ps = PeripheralStructure::new(&ball, &self.cfg.peripherals)?;
            let cusp = cusp_space(&ball, &ps, default_depth_cap(&ball))?;
            Ok(cusp.graph.to_text())
        })?;
        if outcome.from_cache {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
        }
        if outcome.rebuilt_corrupt {
            self.cache_rebuilds.fetch_add(1, Ordering::Relaxed);
        }
        MetricGraph::from_text(&outcome.payload).map_err(|e| RunError::Space(e.to_string()))
    }

    fn recurrence_item(&self, len: u32) -> Result<ItemOut, RunError> {
        let mut out = ItemOut::default();
        let space = self.space(self.size_for_length(len))?;
        let geo = reference_geodesic(&space, len).map_err(RunError::Space)?;
        let g = space.graph();
        let mut cs = self.cfg.c.clone();
        cs.sort_by(|a, b| (a.num * b.den).cmp(&(b.num * a.den)));
        cs.dedup();
        for &t in &self.cfg.t {
            let mut prof = RecurrenceProfile::new(t);
            for &c in &cs {
                let r = recurrence_constant(g, &geo, t, c)?;
                let wid = out.witness("detour", r.witness.as_ref().map(|w| w.verts.as_slice()));
                out.rows.push(TableRow {
                    quantity: "m_hat".into(),
                    param_1: format!("len={len}"),
                    param_2: format!("t={t};C={c}"),
                    value: r.m_hat.to_string(),
                    witness_id: wid,
                });
                out.plot.push(PlotRow {
                    quantity: "m_hat".into(),
                    x: len as f64,
                    y: r.m_hat as f64,
                    series: format!("t={t};C={c}"),
                });
                prof.push(c, r)?;
            }
        }
        Ok(out)
    }

    fn stability_item(&self, len: u32) -> Result<ItemOut, RunError> {
        let mut out = ItemOut::default();
        let space = self.space(self.size_for_length(len))?;
        let geo = reference_geodesic(&space, len).map_err(RunError::Space)?;
        let g = space.graph();
        let mode = match self.cfg.mode {
            StabilityModeCfg::Exact => StabilityMode::ExactOracle,
            StabilityModeCfg::Probe => StabilityMode::Probe,
            StabilityModeCfg::Auto => {
                if g.vertex_count() <= 60 {
                    StabilityMode::ExactOracle
                } else {
                    StabilityMode::Probe
                }
            }
        };
        let mode_name = match mode {
            StabilityMode::ExactOracle => "exact",
            StabilityMode::Probe => "probe",
        };
        for &k in &self.cfg.kappa {
            for &l in &self.cfg.lambda {
                let params = QgParams::new(k, l)?;
                let res = stability_constant(g, &geo, &params, mode)?;
                let wid = out.witness("quasigeodesic", Some(&res.witness));
                out.rows.push(TableRow {
                    quantity: "d_hat".into(),
                    param_1: format!("len={len}"),
                    param_2: format!("kappa={k};lambda={l};mode={mode_name}"),
                    value: res.d_hat.to_string(),
                    witness_id: wid,
                });
                out.plot.push(PlotRow {
                    quantity: "d_hat".into(),
                    x: len as f64,
                    y: res.d_hat as f64,
                    series: format!("kappa={k};lambda={l}"),
                });
            }
        }
        Ok(out)
    }

    fn contraction_item(&self, len: u32) -> Result<ItemOut, RunError> {
        let mut out = ItemOut::default();
        let space = self.space(self.size_for_length(len))?;
        let geo = reference_geodesic(&space, len).map_err(RunError::Space)?;
        let y = geo.vertex_set();
        for &eps in &self.cfg.eps {
            let prof = contraction_profile(space.graph(), &y, eps)?;
            let p1 = format!("len={len};eps={eps}");
            for &(r, rho) in &prof.samples {
                out.rows.push(TableRow {
                    quantity: "rho_hat".into(),
                    param_1: p1.clone(),
                    param_2: format!("r={r}"),
                    value: rho.to_string(),
                    witness_id: String::new(),
                });
                out.plot.push(PlotRow {
                    quantity: "rho_hat".into(),
                    x: r as f64,
                    y: rho as f64,
                    series: p1.clone(),
                });
            }
            for &(r, env) in &prof.envelope {
                out.rows.push(TableRow {
                    quantity: "rho_bar".into(),
                    param_1: p1.clone(),
                    param_2: format!("r={r}"),
                    value: format!("{env:.6}"),
                    witness_id: String::new(),
                });
            }
            out.rows.push(TableRow {
                quantity: "sublinear_exponent".into(),
                param_1: p1.clone(),
                param_2: String::new(),
                value: format!("{:.6}", prof.verdict.exponent),
                witness_id: String::new(),
            });
            out.verdicts.push(Verdict {
                name: format!("sublinear {p1}"),
                holds: prof.verdict.sublinear,
                must_hold: false,
            });
        }
        Ok(out)
    }

    fn property5_item(&self, len: u32) -> Result<ItemOut, RunError> {
        let mut out = ItemOut::default();
        let space = self.space(self.size_for_length(len))?;
        let geo = reference_geodesic(&space, len).map_err(RunError::Space)?;
        for &c in &self.cfg.c {
            let res = property5_constant(space.graph(), &geo, c)?;
            let wid = out.witness("detour", res.witness.as_ref().map(|w| w.verts.as_slice()));
            out.rows.push(TableRow {
                quantity: "k_hat".into(),
                param_1: format!("len={len}"),
                param_2: format!("C={c}"),
                value: res.k_hat.to_string(),
                witness_id: wid,
            });
            out.plot.push(PlotRow {
                quantity: "k_hat".into(),
                x: len as f64,
                y: res.k_hat as f64,
                series: format!("C={c}"),
            });
        }
        Ok(out)
    }

    fn pullback_item(&self, radius: u32) -> Result<ItemOut, RunError> {
        let mut out = ItemOut::default();
        let Space::Ball(ball) = self.space(radius)? else {
            return Err(RunError::Config("pullback needs a group space".into()));
        };
        let cusp = self.cusp_graph(radius)?;
        let max_gen = self.cfg.subgroup.iter().map(|g| g.len()).max().unwrap_or(1).max(1) as u32;
        let h_radius = ((3 * radius / 4) / max_gen).max(1);
        let orbit = orbit_map(&ball, &self.cfg.subgroup, h_radius)?;
        // Farthest pair in the intrinsic (domain) metric, lex tie-break.
        let n = orbit.domain.vertex_count();
        let mut best = (0u32, 0u32, 0u32);
        for u in 0..n as u32 {
            let du = orbit.domain.dist_from(u)?;
            for v in u + 1..n as u32 {
                if du[v as usize] > best.0 {
                    best = (du[v as usize], u, v);
                }
            }
        }
        let (a, b) = (orbit.image[best.1 as usize], orbit.image[best.2 as usize]);
        let geo_img = cusp.shortest_path(a, b)?;
        let geo_base = ball.graph.shortest_path(a, b)?;
        for &t in &self.cfg.t {
            for &c in &self.cfg.c {
                let img = recurrence_constant(&cusp, &geo_img, t, c)?;
                let pulled = recurrence_constant(&ball.graph, &geo_base, t, c)?;
                let p2 = format!("t={t};C={c}");
                let wid = out.witness("detour", img.witness.as_ref().map(|w| w.verts.as_slice()));
                out.rows.push(TableRow {
                    quantity: "m_hat_image".into(),
                    param_1: format!("radius={radius}"),
                    param_2: p2.clone(),
                    value: img.m_hat.to_string(),
                    witness_id: wid,
                });
                let wid =
                    out.witness("detour", pulled.witness.as_ref().map(|w| w.verts.as_slice()));
                out.rows.push(TableRow {
                    quantity: "m_hat_pulled".into(),
                    param_1: format!("radius={radius}"),
                    param_2: p2.clone(),
                    value: pulled.m_hat.to_string(),
                    witness_id: wid,
                });
                out.plot.push(PlotRow {
                    quantity: "m_hat_image".into(),
                    x: radius as f64,
                    y: img.m_hat as f64,
                    series: p2.clone(),
                });
                out.plot.push(PlotRow {
                    quantity: "m_hat_pulled".into(),
                    x: radius as f64,
                    y: pulled.m_hat as f64,
                    series: p2,
                });
            }
        }
        Ok(out)
    }

    fn relhyp_item(&self) -> Result<ItemOut, RunError> {
        let SpaceSpec::Group(g) = &self.cfg.space else {
            return Err(RunError::Config("relhyp_criterion needs a group space".into()));
        };
        let report = qstab::relhyp::criterion_runner(
            g,
            &self.cfg.peripherals,
            &self.cfg.subgroup,
            &self.cfg.radii,
        )?;
        let mut out = ItemOut::default();
        for row in &report.rows {
            let p1 = format!("radius={}", row.radius);
            for (q, v) in [
                ("m_hat", row.m_hat.to_string()),
                ("cusp_undistorted", (row.cusp_undistorted as u8).to_string()),
                ("cone_undistorted", (row.cone_undistorted as u8).to_string()),
                ("peripheral_diam", row.peripheral_diam.to_string()),
            ] {
                out.rows.push(TableRow {
                    quantity: q.into(),
                    param_1: p1.clone(),
                    param_2: String::new(),
                    value: v.clone(),
                    witness_id: String::new(),
                });
                out.plot.push(PlotRow {
                    quantity: q.into(),
                    x: row.radius as f64,
                    y: v.parse().unwrap_or(0.0),
                    series: "criterion".into(),
                });
            }
        }
        for (name, holds, must) in [
            ("verdict_recurrence", report.verdict_recurrence, false),
            ("verdict_cusp", report.verdict_cusp, false),
            ("verdict_cone", report.verdict_cone, false),
            ("verdicts_consistent", report.consistent, true),
        ] {
            out.verdicts.push(Verdict { name: name.into(), holds, must_hold: must });
        }
        Ok(out)
    }
}

pub fn run_scenario(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let budget = opts.budget_seconds.or(cfg.budget_seconds).map(Duration::from_secs);
    let deadline = budget.map(|b| start + b);
    let cache = opts
        .cache
        .clone()
        .unwrap_or_else(|| Cache::from_env(opts.no_cache));
    let runner = Runner {
        cfg,
        cache,
        cache_hits: AtomicUsize::new(0),
        cache_rebuilds: AtomicUsize::new(0),
    };

    let outputs: Vec<Option<Result<ItemOut, RunError>>> = match cfg.scenario {
        Scenario::Recurrence => {
            par_map(&cfg.lengths, opts.threads, deadline, |&l| runner.recurrence_item(l))
        }
        Scenario::Stability => {
            par_map(&cfg.lengths, opts.threads, deadline, |&l| runner.stability_item(l))
        }
        Scenario::Contraction => {
            par_map(&cfg.lengths, opts.threads, deadline, |&l| runner.contraction_item(l))
        }
        Scenario::Property5 => {
            par_map(&cfg.lengths, opts.threads, deadline, |&l| runner.property5_item(l))
        }
        Scenario::Pullback => {
            par_map(&cfg.radii, opts.threads, deadline, |&r| runner.pullback_item(r))
        }
        Scenario::RelhypCriterion => {
            par_map(&[()], opts.threads, deadline, |_| runner.relhyp_item())
        }
    };

    let mut report = RunReport {
        scenario: cfg.scenario.name().into(),
        config_hash: cfg.hash(),
        config_echo: cfg.raw.clone(),
        rows: Vec::new(),
        plot: Vec::new(),
        verdicts: Vec::new(),
        witnesses: Vec::new(),
        output: opts.output.clone().unwrap_or_else(|| cfg.output.clone()),
        wall_ms: 0,
        budget_exceeded: false,
        incomplete: false,
        cache_hits: 0,
        cache_rebuilds: 0,
    };
    for slot in outputs {
        match slot {
            None => {
                report.budget_exceeded = true;
                report.incomplete = true;
            }
            Some(Err(e)) => return Err(e),
            Some(Ok(item)) => {
                // Re-key local witness ids (`@k`) to global ones.
                let base = report.witnesses.len();
                for (k, (kind, detail)) in item.witnesses.into_iter().enumerate() {
                    report.witnesses.push(Witness {
                        id: format!("w{}", base + k),
                        kind,
                        detail,
                    });
                }
                for mut row in item.rows {
                    if let Some(local) = row.witness_id.strip_prefix('@') {
                        let k: usize = local.parse().expect("local witness id");
                        row.witness_id = format!("w{}", base + k);
                    }
                    report.rows.push(row);
                }
                report.plot.extend(item.plot);
                report.verdicts.extend(item.verdicts);
            }
        }
    }
    report.cache_hits = runner.cache_hits.load(Ordering::Relaxed);
    report.cache_rebuilds = runner.cache_rebuilds.load(Ordering::Relaxed);
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run(text: &str) -> RunReport {
        let cfg = parse_config(text).unwrap();
        let opts = RunOptions { cache: Some(Cache::disabled()), ..Default::default() };
        run_scenario(&cfg, &opts).unwrap()
    }

    #[test]
    fn recurrence_on_a_tree_is_all_zero() {
        let report = run(
            "scenario = recurrence\ngroup = free(2)\nlengths = 6,8\nt = 1/3\nc = 2,3\n",
        );
        assert_eq!(report.rows.len(), 4);
        assert!(report.rows.iter().all(|r| r.quantity == "m_hat" && r.value == "0"));
        assert!(!report.budget_exceeded);
    }

    #[test]
    fn recurrence_grows_on_the_plane() {
        let report = run(
            "scenario = recurrence\ngroup = free_abelian(2)\nlengths = 8,12\nt = 1/3\nc = 3\n",
        );
        let vals: Vec<i64> = report.rows.iter().map(|r| r.value.parse().unwrap()).collect();
        assert!(vals[1] > vals[0], "{vals:?}");
        // Witnesses resolve.
        for row in &report.rows {
            assert!(report.witnesses.iter().any(|w| w.id == row.witness_id));
        }
    }

    #[test]
    fn stability_auto_mode_switches() {
        let report = run(
            "scenario = stability\ngroup = free(2)\nlengths = 4,8\nkappa = 1\nlambda = 0\nmode = auto\n",
        );
        // len 4 → radius 5 ball (485 verts) → probe; both zero on a tree.
        assert!(report.rows.iter().all(|r| r.value == "0"));
    }

    #[test]
    fn threads_do_not_change_results() {
        let cfg = parse_config(
            "scenario = property5\ngroup = free_abelian(2)\nlengths = 6,8,10\nc = 3\n",
        )
        .unwrap();
        let seq = run_scenario(
            &cfg,
            &RunOptions { cache: Some(Cache::disabled()), ..Default::default() },
        )
        .unwrap();
        let par = run_scenario(
            &cfg,
            &RunOptions { threads: 3, cache: Some(Cache::disabled()), ..Default::default() },
        )
        .unwrap();
        let fmt = |r: &RunReport| {
            r.rows
                .iter()
                .map(|x| format!("{}|{}|{}|{}|{}", x.quantity, x.param_1, x.param_2, x.value, x.witness_id))
                .collect::<Vec<_>>()
        };
        assert_eq!(fmt(&seq), fmt(&par));
    }

    #[test]
    fn zero_budget_yields_incomplete_report() {
        let cfg = parse_config(
            "scenario = recurrence\ngroup = free(2)\nlengths = 6\nt = 1/3\nc = 2\n",
        )
        .unwrap();
        let report = run_scenario(
            &cfg,
            &RunOptions {
                budget_seconds: Some(0),
                cache: Some(Cache::disabled()),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.budget_exceeded && report.incomplete);
        assert!(report.rows.is_empty());
    }

    #[test]
    fn relhyp_scenario_reports_consistent_verdicts() {
        let report = run(
            "scenario = relhyp_criterion\ngroup = free(2)\nperipheral = 1\nsubgroup = b\nradii = 4,5,6\n",
        );
        let consistent = report.verdicts.iter().find(|v| v.name == "verdicts_consistent").unwrap();
        assert!(consistent.holds && consistent.must_hold);
        assert!(!report.failed_must_hold());
    }
}
