//! Spec files: TOML documents describing one measure or representation plus
//! optional symmetry group and quasi-decomposability pairs.

use std::fmt;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use idcenter::levyrep::{MixingLevy, OrbitLevy};
use idcenter::linalg::MAX_DIM;
use idcenter::{Atom, IdMeasure, LevyAtoms, Operator, Vector};

pub const SCHEMA_VERSION: i64 = 1;

/// 1-based line and column of a byte offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn of(src: &str, offset: usize) -> Self {
        let mut end = offset.min(src.len());
        while !src.is_char_boundary(end) {
            end -= 1;
        }
        let before = &src[..end];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Self { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputError {
    pub message: String,
    pub location: Option<Location>,
}

impl InputError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            location: None,
        }
    }

    pub fn at(location: Location, message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            location: Some(location),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some(loc) => write!(f, "{loc}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for InputError {}

type Matrix = Vec<Vec<f64>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    version: Option<Spanned<i64>>,
    dimension: Option<Spanned<i64>>,
    measure: Option<Spanned<RawMeasure>>,
    orbit_rep: Option<Spanned<RawOrbit>>,
    mixing_rep: Option<Spanned<RawMixing>>,
    group: Option<Spanned<RawGroup>>,
    #[serde(default)]
    pairs: Vec<Spanned<RawPair>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    point: Spanned<Vec<f64>>,
    weight: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    shift: Option<Spanned<Vec<f64>>>,
    gaussian: Option<Spanned<Matrix>>,
    #[serde(default)]
    atoms: Vec<RawAtom>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    elements: Option<Vec<Spanned<Matrix>>>,
    generators: Option<Vec<Spanned<Matrix>>>,
    shifts: Option<Vec<Spanned<Vec<f64>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    a: Spanned<f64>,
    #[serde(rename = "A")]
    op: Spanned<Matrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrbit {
    a: Spanned<f64>,
    #[serde(rename = "A")]
    op: Spanned<Matrix>,
    seeds: Vec<RawAtom>,
    shift: Option<Spanned<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMixing {
    #[serde(rename = "B")]
    b: Spanned<Matrix>,
    #[serde(default)]
    seeds: Vec<RawAtom>,
    shift: Option<Spanned<Vec<f64>>>,
    v0: Option<Spanned<Vec<f64>>>,
}

pub enum Entity {
    Measure(IdMeasure),
    Orbit { rep: OrbitLevy, shift: Vector },
    Mixing { rep: MixingLevy, shift: Vector, v0: Option<Vector> },
}

impl Entity {
    pub fn kind(&self) -> &'static str {
        match self {
            Entity::Measure(_) => "measure",
            Entity::Orbit { .. } => "orbit_rep",
            Entity::Mixing { .. } => "mixing_rep",
        }
    }
}

pub enum GroupOps {
    /// The full list of elements, optionally with the expected shifts `h_S`.
    Elements { ops: Vec<Operator>, shifts: Option<Vec<Vector>> },
    /// Generators to be closed under multiplication.
    Generators(Vec<Operator>),
}

pub struct Group {
    pub ops: GroupOps,
    pub location: Location,
}

pub struct Pair {
    pub a: f64,
    pub op: Operator,
    pub location: Location,
}

pub struct Spec {
    pub dim: usize,
    pub entity: Entity,
    pub entity_location: Location,
    pub group: Option<Group>,
    pub pairs: Vec<Pair>,
}

struct Builder<'a> {
    src: &'a str,
    dim: usize,
}

impl Builder<'_> {
    fn loc(&self, span: Range<usize>) -> Location {
        Location::of(self.src, span.start)
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> InputError {
        InputError::at(self.loc(span), message)
    }

    fn finite(&self, span: Range<usize>, what: &str, xs: &[f64]) -> Result<(), InputError> {
        if xs.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(self.err(span, format!("{what} contains a non-finite value")))
        }
    }

    fn vector(&self, v: &Spanned<Vec<f64>>, what: &str) -> Result<Vector, InputError> {
        let xs = v.get_ref();
        if xs.len() != self.dim {
            return Err(self.err(
                v.span(),
                format!("dimension mismatch: {what} has {} entries, expected {}", xs.len(), self.dim),
            ));
        }
        self.finite(v.span(), what, xs)?;
        Vector::new(xs.clone()).map_err(|e| self.err(v.span(), format!("{what}: {e}")))
    }

    fn optional_vector(&self, v: &Option<Spanned<Vec<f64>>>, what: &str) -> Result<Vector, InputError> {
        match v {
            Some(v) => self.vector(v, what),
            None => Ok(Vector::zeros(self.dim)),
        }
    }

    fn matrix(&self, m: &Spanned<Matrix>, what: &str) -> Result<Operator, InputError> {
        let rows = m.get_ref();
        let d = self.dim;
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            let shape = match rows.iter().map(Vec::len).max() {
                Some(c) => format!("{}x{}", rows.len(), c),
                None => "empty".into(),
            };
            return Err(self.err(
                m.span(),
                format!("dimension mismatch: {what} is {shape}, expected {d}x{d}"),
            ));
        }
        for r in rows {
            self.finite(m.span(), what, r)?;
        }
        Operator::from_rows(rows).map_err(|e| self.err(m.span(), format!("{what}: {e}")))
    }

    fn atoms(&self, raw: &[RawAtom], what: &str) -> Result<LevyAtoms, InputError> {
        let mut atoms = Vec::with_capacity(raw.len());
        for (i, at) in raw.iter().enumerate() {
            let point = self.vector(&at.point, &format!("{what} {i} point"))?;
            let w = *at.weight.get_ref();
            if !(w.is_finite() && w > 0.0) {
                return Err(self.err(at.weight.span(), format!("{what} {i} weight must be positive, got {w}")));
            }
            if point.is_zero() {
                return Err(self.err(at.point.span(), format!("{what} {i} sits at the origin")));
            }
            atoms.push(Atom::new(point, w));
        }
        LevyAtoms::new(self.dim, atoms).map_err(|e| InputError::new(format!("{what}s: {e}")))
    }

    fn measure(&self, raw: &Spanned<RawMeasure>) -> Result<IdMeasure, InputError> {
        let m = raw.get_ref();
        let shift = self.optional_vector(&m.shift, "measure shift")?;
        let gaussian = match &m.gaussian {
            Some(g) => self.matrix(g, "measure gaussian")?,
            None => Operator::zeros(self.dim),
        };
        let levy = self.atoms(&m.atoms, "atom")?;
        IdMeasure::new(shift, gaussian, levy).map_err(|e| self.err(raw.span(), e.to_string()))
    }

    fn orbit(&self, raw: &Spanned<RawOrbit>) -> Result<(OrbitLevy, Vector), InputError> {
        let o = raw.get_ref();
        let op = self.matrix(&o.op, "orbit_rep A")?;
        let shift = self.optional_vector(&o.shift, "orbit_rep shift")?;
        let seeds = self.atoms(&o.seeds, "seed")?;
        let rep = OrbitLevy::new(seeds, op, *o.a.get_ref()).map_err(|e| self.err(raw.span(), e.to_string()))?;
        Ok((rep, shift))
    }

    fn mixing(&self, raw: &Spanned<RawMixing>) -> Result<(MixingLevy, Vector, Option<Vector>), InputError> {
        let m = raw.get_ref();
        let b = self.matrix(&m.b, "mixing_rep B")?;
        if let (Some(_), Some(v0)) = (&m.shift, &m.v0) {
            return Err(self.err(v0.span(), "mixing_rep takes either shift or v0, not both"));
        }
        let shift = self.optional_vector(&m.shift, "mixing_rep shift")?;
        let v0 = m.v0.as_ref().map(|v| self.vector(v, "mixing_rep v0")).transpose()?;
        let seeds = self.atoms(&m.seeds, "seed")?;
        let rep = MixingLevy::new(seeds, b).map_err(|e| self.err(raw.span(), e.to_string()))?;
        Ok((rep, shift, v0))
    }

    fn group(&self, raw: &Spanned<RawGroup>) -> Result<Group, InputError> {
        let g = raw.get_ref();
        let location = self.loc(raw.span());
        let ops = |list: &[Spanned<Matrix>], what: &str| -> Result<Vec<Operator>, InputError> {
            list.iter()
                .enumerate()
                .map(|(i, m)| self.matrix(m, &format!("group {what} {i}")))
                .collect()
        };
        let ops = match (&g.elements, &g.generators) {
            (Some(elements), None) => {
                let ops = ops(elements, "element")?;
                let shifts = match &g.shifts {
                    Some(list) => {
                        if list.len() != ops.len() {
                            return Err(InputError::at(
                                location,
                                format!("group has {} elements but {} shifts", ops.len(), list.len()),
                            ));
                        }
                        let shifts = list
                            .iter()
                            .enumerate()
                            .map(|(i, v)| self.vector(v, &format!("group shift {i}")))
                            .collect::<Result<Vec<_>, _>>()?;
                        Some(shifts)
                    }
                    None => None,
                };
                GroupOps::Elements { ops, shifts }
            }
            (None, Some(generators)) => {
                if g.shifts.is_some() {
                    return Err(InputError::at(location, "group shifts require the elements form"));
                }
                GroupOps::Generators(ops(generators, "generator")?)
            }
            _ => {
                return Err(InputError::at(
                    location,
                    "group needs exactly one of elements or generators",
                ))
            }
        };
        Ok(Group { ops, location })
    }

    fn pair(&self, raw: &Spanned<RawPair>, i: usize) -> Result<Pair, InputError> {
        let p = raw.get_ref();
        let a = *p.a.get_ref();
        if !(a.is_finite() && a > 0.0 && a != 1.0) {
            return Err(self.err(p.a.span(), format!("pair {i}: a = {a} must be positive and differ from 1")));
        }
        let op = self.matrix(&p.op, &format!("pair {i} A"))?;
        Ok(Pair {
            a,
            op,
            location: self.loc(raw.span()),
        })
    }
}

fn toml_error(src: &str, e: &toml::de::Error) -> InputError {
    let message = e.message().trim().to_string();
    match e.span() {
        Some(span) => InputError::at(Location::of(src, span.start), message),
        None => InputError::new(message),
    }
}

/// Parses and validates a spec file. Every error carries the line and column
/// of the offending item when one can be identified.
pub fn parse(src: &str) -> Result<Spec, InputError> {
    let raw: RawSpec = toml::from_str(src).map_err(|e| toml_error(src, &e))?;
    let start = Location { line: 1, column: 1 };

    match &raw.version {
        None => return Err(InputError::at(start, "missing schema field `version`")),
        Some(v) if *v.get_ref() != SCHEMA_VERSION => {
            return Err(InputError::at(
                Location::of(src, v.span().start),
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", v.get_ref()),
            ))
        }
        Some(_) => {}
    }
    let dim = match &raw.dimension {
        None => return Err(InputError::at(start, "missing field `dimension`")),
        Some(d) => {
            let n = *d.get_ref();
            if n < 1 || n > MAX_DIM as i64 {
                return Err(InputError::at(
                    Location::of(src, d.span().start),
                    format!("dimension {n} outside 1..={MAX_DIM}"),
                ));
            }
            n as usize
        }
    };
    let b = Builder { src, dim };

    let present: Vec<(&str, Range<usize>)> = [
        raw.measure.as_ref().map(|m| ("measure", m.span())),
        raw.orbit_rep.as_ref().map(|m| ("orbit_rep", m.span())),
        raw.mixing_rep.as_ref().map(|m| ("mixing_rep", m.span())),
    ]
    .into_iter()
    .flatten()
    .collect();
    match present.len() {
        0 => return Err(InputError::at(start, "expected one of [measure], [orbit_rep] or [mixing_rep]")),
        1 => {}
        _ => {
            let names: Vec<&str> = present.iter().map(|(n, _)| *n).collect();
            return Err(b.err(
                present[1].1.clone(),
                format!("expected exactly one entity, found {}", names.join(", ")),
            ));
        }
    }
    let entity_location = b.loc(present[0].1.clone());

    let entity = if let Some(m) = &raw.measure {
        Entity::Measure(b.measure(m)?)
    } else if let Some(o) = &raw.orbit_rep {
        let (rep, shift) = b.orbit(o)?;
        Entity::Orbit { rep, shift }
    } else {
        let (rep, shift, v0) = b.mixing(raw.mixing_rep.as_ref().expect("one entity is present"))?;
        Entity::Mixing { rep, shift, v0 }
    };

    let group = raw.group.as_ref().map(|g| b.group(g)).transpose()?;
    let pairs = raw
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| b.pair(p, i))
        .collect::<Result<Vec<_>, _>>()?;

    if !matches!(entity, Entity::Measure(_)) {
        if let Some(g) = &group {
            return Err(InputError::at(g.location, "[group] applies to a [measure] entity only"));
        }
        if let Some(p) = pairs.first() {
            return Err(InputError::at(p.location, "[[pairs]] apply to a [measure] entity only"));
        }
    }

    Ok(Spec {
        dim,
        entity,
        entity_location,
        group,
        pairs,
    })
}
