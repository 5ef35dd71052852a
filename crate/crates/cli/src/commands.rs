//! The five subcommands. Each turns a parsed spec into a [`Report`]; input
//! problems surface as errors instead.

use anyhow::{anyhow, bail, Context, Result};

use idcenter::levyrep::{LevyRep, MixingLevy, OrbitLevy};
use idcenter::quasidecomp::{
    center_qd_with, center_stable_with, check_qd_with, criterion::criterion_ordinary_with, criterion::criterion_with,
    CenteringResult, Certificate, OrdinaryMode, StableShiftFn, Tolerances,
};
use idcenter::symmetry::{universal_center, SymmetryGroup};
use idcenter::{Error, ExecMode, FrequencyGrid, IdMeasure, Vector};

use crate::report::Report;
use crate::spec::{Entity, Group, GroupOps, InputError, Location, Spec};

/// Absolute tolerance for Lévy integrals over a mixing representation.
pub const QUADRATURE_TOL: f64 = 1e-11;

/// Orbit terms on each side of the seeds when a representation is
/// materialized into a finite measure.
pub const DEFAULT_DEPTH: usize = 30;

pub struct Settings {
    pub tol: Tolerances,
    pub grid: FrequencyGrid,
    pub depth: usize,
}

impl Settings {
    pub fn record(&self, r: &mut Report) {
        r.tolerance("rank", self.tol.rank);
        r.tolerance("orthogonality", self.tol.orthogonality);
        r.tolerance("orthogonality_floor", self.tol.orthogonality_floor);
        r.tolerance("triplet", self.tol.triplet);
        r.tolerance("verify", self.tol.verify);
        r.tolerance("criterion", self.tol.criterion);
    }
}

fn located(loc: Location, e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!(InputError::at(loc, e.to_string()))
}

fn build_group(mu: &IdMeasure, g: &Group, tol: &Tolerances) -> Result<SymmetryGroup> {
    let built = match &g.ops {
        GroupOps::Elements { ops, .. } => SymmetryGroup::new(mu, ops.clone()),
        GroupOps::Generators(gens) => SymmetryGroup::generate(mu, gens),
    }
    .map_err(|e| located(g.location, e))?;
    if let GroupOps::Elements { shifts: Some(expected), .. } = &g.ops {
        for (i, (want, got)) in expected.iter().zip(built.shifts()).enumerate() {
            let gap = want.distance(got);
            if gap.is_nan() || gap > tol.verify * got.norm().max(1.0) {
                bail!(located(
                    g.location,
                    format!("group shift {i} differs from the computed h_S by {gap:e}")
                ));
            }
        }
    }
    Ok(built)
}

fn measure_of(spec: &Spec, command: &str) -> Result<IdMeasure> {
    match &spec.entity {
        Entity::Measure(m) => Ok(m.clone()),
        other => Err(located(
            spec.entity_location,
            format!("{command} needs a [measure] entity, found [{}]", other.kind()),
        )),
    }
}

pub fn charfn(spec: &Spec, s: &Settings, r: &mut Report) -> Result<()> {
    let mu = measure_of(spec, "charfn")?;
    let values = mu.charfn_grid(&s.grid, ExecMode::Sequential);
    r.section("charfn");
    r.field("charfn.count", s.grid.len());
    for (i, (u, z)) in s.grid.points().iter().zip(values).enumerate() {
        r.field(format!("charfn.{i}.u"), u);
        r.field(format!("charfn.{i}.re"), z.re);
        r.field(format!("charfn.{i}.im"), z.im);
    }
    Ok(())
}

fn grid_deviations(mu: &IdMeasure, g: &SymmetryGroup, h: &Vector, grid: &FrequencyGrid) -> Vec<f64> {
    let centered = mu.shifted(h);
    g.elements()
        .iter()
        .map(|s| centered.max_charfn_deviation(&centered.pushforward(s), grid, ExecMode::Sequential))
        .collect()
}

/// Universal centering with respect to the group; returns `h'`.
fn symmetry_stage(mu: &IdMeasure, group: &Group, s: &Settings, r: &mut Report) -> Result<Vector> {
    let g = build_group(mu, group, &s.tol)?;
    let h = universal_center(mu, &g).map_err(|e| located(group.location, e))?;
    let support = mu.ssupp(s.tol.rank);
    r.section("symmetry");
    r.field("symmetry.order", g.len());
    r.field("symmetry.support_dim", support.subspace.dim());
    r.field("symmetry.fixed_dim", g.fixed_space().dim());
    for (i, (op, hs)) in g.elements().iter().zip(g.shifts()).enumerate() {
        r.field(format!("symmetry.element.{i}"), op);
        r.field(format!("symmetry.element.{i}.shift"), hs);
    }
    r.field("symmetry.h", &h);
    r.field("symmetry.centered_shift", &(mu.shift() + &h));
    r.field("symmetry.grid_points", s.grid.len());
    for (i, dev) in grid_deviations(mu, &g, &h, &s.grid).into_iter().enumerate() {
        r.check(format!("symmetry.deviation.{i}"), dev, s.tol.verify);
    }
    Ok(h)
}

pub fn center_symmetry(spec: &Spec, s: &Settings, r: &mut Report) -> Result<()> {
    let mu = measure_of(spec, "center-symmetry")?;
    let group = spec
        .group
        .as_ref()
        .ok_or_else(|| anyhow!(InputError::new("center-symmetry needs a [group]")))?;
    symmetry_stage(&mu, group, s, r)?;
    Ok(())
}

fn report_centering(r: &mut Report, prefix: &str, res: &CenteringResult, threshold: f64) {
    let label = if res.exists { "exists" } else { "obstruction" };
    r.verdict(format!("{prefix}.centering"), label, res.exists, threshold);
    match &res.certificate {
        Certificate::Obstruction { w, pairing } => {
            r.field(format!("{prefix}.obstruction.w"), w);
            r.field(format!("{prefix}.obstruction.pairing"), *pairing);
        }
        _ => {
            if let Some(hhat) = &res.hhat {
                r.field(format!("{prefix}.hhat"), hhat);
            }
        }
    }
    for c in &res.checks {
        r.library_check(&format!("{prefix}.check"), c);
    }
}

pub fn center_qd(spec: &Spec, s: &Settings, r: &mut Report) -> Result<()> {
    match &spec.entity {
        Entity::Measure(mu) => center_qd_measure(spec, mu, s, r),
        Entity::Orbit { rep, shift } => center_qd_orbit(rep, shift, s, r),
        Entity::Mixing { rep, shift, v0 } => center_qd_mixing(rep, shift, v0.as_ref(), s, r),
    }
}

fn center_qd_measure(spec: &Spec, mu: &IdMeasure, s: &Settings, r: &mut Report) -> Result<()> {
    if spec.pairs.is_empty() {
        bail!(located(spec.entity_location, "center-qd on a [measure] needs at least one [[pairs]] entry"));
    }
    let (mu, h_sym) = match &spec.group {
        Some(g) => {
            let h = symmetry_stage(mu, g, s, r)?;
            (mu.shifted(&h), Some(h))
        }
        None => (mu.clone(), None),
    };
    let mut first: Option<Vector> = None;
    for (i, pair) in spec.pairs.iter().enumerate() {
        let prefix = format!("pair.{i}");
        r.section(&prefix);
        r.field(format!("{prefix}.a"), pair.a);
        let witness = check_qd_with(&mu, pair.a, &pair.op, &[], &s.tol)
            .map_err(|e| located(pair.location, e))?
            .ok_or_else(|| {
                located(
                    pair.location,
                    Error::NotQuasiDecomposable(format!(
                        "pair {i}: mu^a differs from A mu * delta(h) for every h at tolerance {:e}",
                        s.tol.triplet
                    )),
                )
            })?;
        r.field(format!("{prefix}.h"), &witness.h);
        let res = center_qd_with(&mu, &witness, &[], &s.tol).map_err(|e| located(pair.location, e))?;
        report_centering(r, &prefix, &res, s.tol.orthogonality_threshold(&witness.h));
        if let Some(hhat) = &res.hhat {
            if let Some(h) = &h_sym {
                r.field(format!("{prefix}.total_shift"), &(h + hhat));
            }
            match &first {
                None => first = Some(hhat.clone()),
                Some(h0) => {
                    let residual = (pair.op.apply(h0) - h0.scale(pair.a)).distance(&witness.h);
                    r.check(
                        format!("{prefix}.common_residual"),
                        residual,
                        s.tol.verify * witness.h.norm().max(1.0),
                    );
                }
            }
        }
    }
    Ok(())
}

fn center_qd_orbit(rep: &OrbitLevy, shift: &Vector, s: &Settings, r: &mut Report) -> Result<()> {
    let n = s.depth;
    let mu = rep.materialized_measure(shift.clone(), n)?;
    let exclude = rep.boundary_points(n);
    r.section("orbit");
    r.field("orbit.a", rep.a());
    r.field("orbit.depth", n);
    r.field("orbit.atoms", mu.levy().len());
    let witness = check_qd_with(&mu, rep.a(), rep.operator(), &exclude, &s.tol)?.ok_or_else(|| {
        anyhow!(Error::NotQuasiDecomposable(
            "materialized orbit measure fails the interior triplet comparison".into()
        ))
    })?;
    r.field("orbit.h", &witness.h);
    let res = center_qd_with(&mu, &witness, &exclude, &s.tol)?;
    report_centering(r, "orbit", &res, s.tol.orthogonality_threshold(&witness.h));
    Ok(())
}

fn center_qd_mixing(rep: &MixingLevy, shift: &Vector, v0: Option<&Vector>, s: &Settings, r: &mut Report) -> Result<()> {
    let sfn = match v0 {
        Some(v0) => StableShiftFn::from_v0(rep.exponent().clone(), v0.clone())?,
        None => StableShiftFn::from_mixing(shift.clone(), rep, QUADRATURE_TOL)?,
    };
    r.section("stable");
    r.field("stable.v0_source", if v0.is_some() { "explicit" } else { "integrated" });
    r.field("stable.v0", &sfn.v0);
    let res = center_stable_with(&sfn, &s.tol)?;
    report_centering(r, "stable", &res, s.tol.orthogonality_threshold(&sfn.v0));
    Ok(())
}

pub fn criterion(spec: &Spec, s: &Settings, r: &mut Report) -> Result<()> {
    let (rep, mode) = match &spec.entity {
        Entity::Orbit { rep, .. } => (LevyRep::Orbit(rep.clone()), OrdinaryMode::Semistable),
        Entity::Mixing { rep, .. } => (LevyRep::Mixing(rep.clone()), OrdinaryMode::Stable),
        Entity::Measure(_) => bail!(located(
            spec.entity_location,
            "criterion needs an [orbit_rep] or [mixing_rep] entity"
        )),
    };
    let res = criterion_with(&rep, &s.tol);
    r.section("criterion");
    r.field("criterion.seeds", rep.seeds().len());
    r.field("criterion.null_dim", res.null_basis.len());
    for (j, (w, p)) in res.null_basis.iter().zip(&res.pairings).enumerate() {
        r.field(format!("criterion.null.{j}"), w);
        r.field(format!("criterion.pairing.{j}"), *p);
        r.check(format!("criterion.pairing.{j}.abs"), p.abs(), res.tolerance);
    }
    let label = if res.satisfied { "satisfied" } else { "violated" };
    r.verdict("criterion.verdict", label, res.satisfied, res.tolerance);
    match criterion_ordinary_with(&rep, mode, &s.tol) {
        Ok(ord) => {
            r.section("ordinary");
            r.field("ordinary.moment", &ord.moment);
            let label = if ord.satisfied { "satisfied" } else { "violated" };
            r.verdict("ordinary.verdict", label, ord.satisfied, ord.tolerance);
        }
        Err(Error::WrongMode(_)) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

pub fn validate(spec: &Spec, s: &Settings, r: &mut Report) -> Result<()> {
    r.section("validate");
    r.field("validate.dimension", spec.dim);
    r.field("validate.entity", spec.entity.kind());
    match &spec.entity {
        Entity::Measure(mu) => {
            r.field("validate.atoms", mu.levy().len());
            r.field("validate.support_dim", mu.ssupp(s.tol.rank).subspace.dim());
            if let Some(g) = &spec.group {
                let built = build_group(mu, g, &s.tol)?;
                r.field("validate.group_order", built.len());
            }
            for (i, pair) in spec.pairs.iter().enumerate() {
                let w = check_qd_with(mu, pair.a, &pair.op, &[], &s.tol).map_err(|e| located(pair.location, e))?;
                if w.is_none() {
                    bail!(located(
                        pair.location,
                        Error::NotQuasiDecomposable(format!("pair {i} at tolerance {:e}", s.tol.triplet))
                    ));
                }
            }
            r.field("validate.pairs", spec.pairs.len());
        }
        Entity::Orbit { rep, .. } => support_check(r, &LevyRep::Orbit(rep.clone()))?,
        Entity::Mixing { rep, .. } => support_check(r, &LevyRep::Mixing(rep.clone()))?,
    }
    Ok(())
}

fn support_check(r: &mut Report, rep: &LevyRep) -> Result<()> {
    let report = idcenter::levyrep::validate_spectral_support(rep).context("spectral support")?;
    r.field("validate.seeds", rep.seeds().len());
    r.field("validate.spectral_dim", report.subspace.dim());
    r.check("validate.spectral_distance", report.max_distance, report.tolerance);
    Ok(())
}
