//! ssp-1 profile container: a TOML header terminated by a line `end_header`,
//! followed by raw little-endian f64 arrays.
//!
//! Arrays are row-major with the last index fastest; vector arrays store
//! their components one after another. Fields may instead be given in
//! closed form (`[[analytic]]`, `[meridional]`), and a periodic grid may
//! declare `velocity = "biot-savart"` to rebuild U from Omega on load.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::axisym::AxisymProfile;
use crate::error::{Error, Result};
use crate::fields::{
    far_exponents, Analytic, Boundary, FieldSource, Grid2, Grid3, Interp, Meridional, Profile, Rank, SampledField, SpectralField,
    SpectralVelocity, Symmetry,
};

pub const FORMAT: &str = "ssp-1";
pub const END_HEADER: &str = "end_header";

/// How U is obtained when it is not stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityFrom {
    /// Trigonometric series of the periodic Biot–Savart velocity (exact, slow pointwise).
    BiotSavart,
    /// Curl of the interpolated periodic stream potential (divergence-free, fast).
    BiotSavartPotential,
}

impl VelocityFrom {
    fn as_str(self) -> &'static str {
        match self {
            VelocityFrom::BiotSavart => "biot-savart",
            VelocityFrom::BiotSavartPotential => "biot-savart-potential",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridRecord {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub boundary: Boundary,
}

impl GridRecord {
    pub fn from_grid3(g: &Grid3) -> Self {
        GridRecord { dims: g.dims.to_vec(), spacing: g.spacing.to_vec(), origin: g.origin.to_vec(), boundary: g.boundary }
    }

    pub fn from_grid2(g: &Grid2) -> Self {
        GridRecord { dims: g.dims.to_vec(), spacing: g.spacing.to_vec(), origin: g.origin.to_vec(), boundary: Boundary::DecayToZero }
    }

    fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn grid3(&self) -> Result<Grid3> {
        let a3 = |v: &[f64]| [v[0], v[1], v[2]];
        Grid3::new([self.dims[0], self.dims[1], self.dims[2]], a3(&self.spacing), a3(&self.origin), self.boundary)
    }

    pub fn grid2(&self) -> Result<Grid2> {
        Grid2::new([self.dims[0], self.dims[1]], [self.spacing[0], self.spacing[1]], [self.origin[0], self.origin[1]])
    }

    pub fn describe(&self) -> String {
        let d: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        format!("{} h={:?} {}", d.join("x"), self.spacing, self.boundary.as_str())
    }
}

/// In-memory image of an ssp-1 file.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileDoc {
    pub gamma: f64,
    pub symmetry: Symmetry,
    pub c_flat: Option<f64>,
    pub interp: Interp,
    pub velocity: Option<VelocityFrom>,
    pub grid: Option<GridRecord>,
    /// (name, values); rank follows from the name.
    pub arrays: Vec<(String, Vec<f64>)>,
    pub analytic: Vec<(String, Analytic)>,
    pub meridional: Option<Meridional>,
    /// Free-form `[meta]` table (fixture family, parameters, expected outcomes).
    pub meta: Table,
}

const CARTESIAN_NAMES: [&str; 3] = ["U", "Omega", "P"];
const AXISYM_NAMES: [&str; 7] = ["U_r", "U_theta", "U_z", "Omega_r", "Omega_theta", "Omega_z", "P"];

fn array_rank(sym: Symmetry, name: &str) -> Option<Rank> {
    match sym {
        Symmetry::Cartesian => match name {
            "U" | "Omega" => Some(Rank::Vector),
            "P" => Some(Rank::Scalar),
            _ => None,
        },
        Symmetry::Axisym => AXISYM_NAMES.contains(&name).then_some(Rank::Scalar),
    }
}

fn fmt_err(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Format { field: field.into(), reason: reason.into() }
}

fn sym_str(s: Symmetry) -> &'static str {
    match s {
        Symmetry::Cartesian => "cartesian",
        Symmetry::Axisym => "axisym",
    }
}

impl ProfileDoc {
    pub fn new(gamma: f64, symmetry: Symmetry) -> Self {
        ProfileDoc {
            gamma,
            symmetry,
            c_flat: None,
            interp: Interp::Cubic,
            velocity: None,
            grid: None,
            arrays: Vec::new(),
            analytic: Vec::new(),
            meridional: None,
            meta: Table::new(),
        }
    }

    pub fn header_text(&self) -> Result<String> {
        let mut t = Table::new();
        t.insert("format".into(), FORMAT.into());
        t.insert("gamma".into(), self.gamma.into());
        t.insert("symmetry".into(), sym_str(self.symmetry).into());
        if let Some(c) = self.c_flat {
            t.insert("c_flat".into(), c.into());
        }
        t.insert("interp".into(), (self.interp.order() as i64).into());
        if let Some(v) = self.velocity {
            t.insert("velocity".into(), v.as_str().into());
        }
        if let Some(g) = &self.grid {
            let mut gt = Table::new();
            gt.insert("dims".into(), Value::Array(g.dims.iter().map(|&d| Value::Integer(d as i64)).collect()));
            gt.insert("spacing".into(), Value::Array(g.spacing.iter().map(|&d| Value::Float(d)).collect()));
            gt.insert("origin".into(), Value::Array(g.origin.iter().map(|&d| Value::Float(d)).collect()));
            gt.insert("boundary".into(), g.boundary.as_str().into());
            t.insert("grid".into(), Value::Table(gt));
        }
        let mut offset = 0usize;
        let mut recs = Vec::new();
        for (name, data) in &self.arrays {
            let rank = array_rank(self.symmetry, name).ok_or_else(|| fmt_err(format!("array.{name}"), "unknown array name"))?;
            let mut a = Table::new();
            a.insert("name".into(), name.as_str().into());
            a.insert("rank".into(), if rank == Rank::Vector { "vector" } else { "scalar" }.into());
            a.insert("offset".into(), (offset as i64).into());
            a.insert("length".into(), (data.len() as i64).into());
            offset += 8 * data.len();
            recs.push(Value::Table(a));
        }
        if !recs.is_empty() {
            t.insert("array".into(), Value::Array(recs));
        }
        if !self.analytic.is_empty() {
            let mut recs = Vec::new();
            for (name, field) in &self.analytic {
                let mut a = Table::new();
                a.insert("name".into(), name.as_str().into());
                a.insert("field".into(), Value::try_from(field).map_err(|e| fmt_err(format!("analytic.{name}"), e.to_string()))?);
                recs.push(Value::Table(a));
            }
            t.insert("analytic".into(), Value::Array(recs));
        }
        if let Some(m) = &self.meridional {
            t.insert("meridional".into(), Value::try_from(m).map_err(|e| fmt_err("meridional", e.to_string()))?);
        }
        if !self.meta.is_empty() {
            t.insert("meta".into(), Value::Table(self.meta.clone()));
        }
        toml::to_string(&t).map_err(|e| fmt_err("header", e.to_string()))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = self.header_text()?.into_bytes();
        out.extend_from_slice(END_HEADER.as_bytes());
        out.push(b'\n');
        for (_, data) in &self.arrays {
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let marker = format!("\n{END_HEADER}\n");
        let (head, blob) = match find(bytes, marker.as_bytes()) {
            Some(i) => (&bytes[..i + 1], &bytes[i + marker.len()..]),
            None => return Err(fmt_err(END_HEADER, "header terminator not found")),
        };
        let text = std::str::from_utf8(head).map_err(|_| fmt_err("header", "not UTF-8"))?;
        let t: Table = text.parse().map_err(|e: toml::de::Error| fmt_err("header", e.message().to_string()))?;
        Self::from_header(&t, blob)
    }

    fn from_header(t: &Table, blob: &[u8]) -> Result<Self> {
        const KNOWN: [&str; 11] =
            ["format", "gamma", "symmetry", "c_flat", "interp", "velocity", "grid", "array", "analytic", "meridional", "meta"];
        match t.get("format").and_then(Value::as_str) {
            Some(FORMAT) => {}
            Some(other) => return Err(fmt_err("format", format!("expected \"{FORMAT}\", found \"{other}\""))),
            None => return Err(fmt_err("format", "missing")),
        }
        let gamma = num(t.get("gamma"), "gamma")?.ok_or_else(|| fmt_err("gamma", "missing"))?;
        if !(gamma > 0.0) {
            return Err(fmt_err("gamma", format!("must be positive, got {gamma}")));
        }
        let symmetry = match t.get("symmetry").map(|v| v.as_str()) {
            None => Symmetry::Cartesian,
            Some(Some("cartesian")) => Symmetry::Cartesian,
            Some(Some("axisym")) => Symmetry::Axisym,
            Some(_) => return Err(fmt_err("symmetry", "expected \"cartesian\" or \"axisym\"")),
        };
        let c_flat = num(t.get("c_flat"), "c_flat")?;
        if c_flat.is_some_and(|c| !(c >= 0.0)) {
            return Err(fmt_err("c_flat", "must be >= 0"));
        }
        let interp = match t.get("interp") {
            None => Interp::Cubic,
            Some(v) => v
                .as_integer()
                .and_then(|o| Interp::from_order(o as u32))
                .ok_or_else(|| fmt_err("interp", "interpolation order must be 1 or 3"))?,
        };
        let velocity = match t.get("velocity").map(|v| v.as_str()) {
            None => None,
            Some(Some("biot-savart")) => Some(VelocityFrom::BiotSavart),
            Some(Some("biot-savart-potential")) => Some(VelocityFrom::BiotSavartPotential),
            Some(_) => return Err(fmt_err("velocity", "expected \"biot-savart\" or \"biot-savart-potential\"")),
        };
        let ndim = if symmetry == Symmetry::Axisym { 2 } else { 3 };
        let grid = match t.get("grid") {
            None => None,
            Some(Value::Table(g)) => Some(parse_grid(g, ndim)?),
            Some(_) => return Err(fmt_err("grid", "must be a table")),
        };
        let mut arrays = Vec::new();
        if let Some(v) = t.get("array") {
            let recs = v.as_array().ok_or_else(|| fmt_err("array", "must be an array of tables"))?;
            let g = grid.as_ref().ok_or_else(|| fmt_err("grid", "required when arrays are present"))?;
            for (i, r) in recs.iter().enumerate() {
                let r = r.as_table().ok_or_else(|| fmt_err(format!("array[{i}]"), "must be a table"))?;
                let f = |k: &str| format!("array[{i}].{k}");
                let name = r.get("name").and_then(Value::as_str).ok_or_else(|| fmt_err(f("name"), "missing"))?;
                let rank = array_rank(symmetry, name).ok_or_else(|| {
                    let allowed: &[&str] = if symmetry == Symmetry::Axisym { &AXISYM_NAMES } else { &CARTESIAN_NAMES };
                    fmt_err(f("name"), format!("unknown array \"{name}\" (expected one of {allowed:?})"))
                })?;
                if let Some(rk) = r.get("rank") {
                    let want = if rank == Rank::Vector { "vector" } else { "scalar" };
                    if rk.as_str() != Some(want) {
                        return Err(fmt_err(f("rank"), format!("\"{name}\" must be {want}")));
                    }
                }
                let offset = uint(r.get("offset"), &f("offset"))?;
                let length = uint(r.get("length"), &f("length"))?;
                let want = rank.ncomp() * g.len();
                if length != want {
                    return Err(fmt_err(f("length"), format!("{length} values, grid needs {want}")));
                }
                if offset % 8 != 0 || offset + 8 * length > blob.len() {
                    return Err(fmt_err(f("offset"), format!("range {offset}..{} outside the {}-byte blob", offset + 8 * length, blob.len())));
                }
                let data: Vec<f64> = blob[offset..offset + 8 * length]
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect();
                if data.iter().any(|v| !v.is_finite()) {
                    return Err(fmt_err(f("name"), format!("\"{name}\" contains non-finite values")));
                }
                if arrays.iter().any(|(n, _): &(String, Vec<f64>)| n == name) {
                    return Err(fmt_err(f("name"), format!("duplicate array \"{name}\"")));
                }
                arrays.push((name.to_string(), data));
            }
        }
        let mut analytic = Vec::new();
        if let Some(v) = t.get("analytic") {
            let recs = v.as_array().ok_or_else(|| fmt_err("analytic", "must be an array of tables"))?;
            for (i, r) in recs.iter().enumerate() {
                let r = r.as_table().ok_or_else(|| fmt_err(format!("analytic[{i}]"), "must be a table"))?;
                let name = r.get("name").and_then(Value::as_str).ok_or_else(|| fmt_err(format!("analytic[{i}].name"), "missing"))?;
                if symmetry != Symmetry::Cartesian || !CARTESIAN_NAMES.contains(&name) {
                    return Err(fmt_err(format!("analytic[{i}].name"), format!("\"{name}\" is not a Cartesian field name")));
                }
                let field: Analytic = r
                    .get("field")
                    .cloned()
                    .ok_or_else(|| fmt_err(format!("analytic[{i}].field"), "missing"))?
                    .try_into()
                    .map_err(|e: toml::de::Error| fmt_err(format!("analytic[{i}].field"), e.message().to_string()))?;
                analytic.push((name.to_string(), field));
            }
        }
        let meridional = match t.get("meridional") {
            None => None,
            Some(v) => {
                if symmetry != Symmetry::Axisym {
                    return Err(fmt_err("meridional", "only valid with symmetry = \"axisym\""));
                }
                Some(v.clone().try_into().map_err(|e: toml::de::Error| fmt_err("meridional", e.message().to_string()))?)
            }
        };
        let meta = match t.get("meta") {
            None => Table::new(),
            Some(Value::Table(m)) => m.clone(),
            Some(_) => return Err(fmt_err("meta", "must be a table")),
        };
        if let Some(k) = t.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(fmt_err(k.clone(), "unknown header field"));
        }
        Ok(ProfileDoc { gamma, symmetry, c_flat, interp, velocity, grid, arrays, analytic, meridional, meta })
    }

    fn array(&self, name: &str) -> Option<&Vec<f64>> {
        self.arrays.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    fn analytic_field(&self, name: &str) -> Option<&Analytic> {
        self.analytic.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    /// Cartesian field by name: stored array first, closed form second.
    fn source(&self, name: &str, rank: Rank, far: f64) -> Result<Option<FieldSource>> {
        if let Some(d) = self.array(name) {
            if self.analytic_field(name).is_some() {
                return Err(fmt_err(format!("analytic.{name}"), "field given both as an array and in closed form"));
            }
            let g = self.grid.as_ref().expect("checked on read").grid3().map_err(|e| fmt_err("grid", e.to_string()))?;
            let n = g.len();
            let comps = (0..rank.ncomp()).map(|c| d[c * n..(c + 1) * n].to_vec()).collect();
            let s = SampledField::new(g, rank, comps, self.interp)?.with_far_exponent(far);
            return Ok(Some(FieldSource::sampled(s)));
        }
        Ok(self.analytic_field(name).map(|a| FieldSource::analytic(a.clone(), rank)))
    }

    pub fn build(&self) -> Result<LoadedProfile> {
        match self.symmetry {
            Symmetry::Cartesian => self.build_cartesian().map(LoadedProfile::Cartesian),
            Symmetry::Axisym => self.build_axisym().map(LoadedProfile::Axisym),
        }
    }

    fn build_cartesian(&self) -> Result<Profile> {
        let (ku, kw, kp) = far_exponents(self.gamma);
        let omega = self.source("Omega", Rank::Vector, kw)?;
        let stored_u = self.source("U", Rank::Vector, ku)?;
        let u = match (self.velocity, stored_u) {
            (None, Some(u)) => u,
            (None, None) => return Err(fmt_err("array.U", "missing (no array, closed form or velocity reconstruction)")),
            (Some(_), Some(_)) => return Err(fmt_err("velocity", "U is stored and also requested from Omega")),
            (Some(how), None) => {
                let g = self.grid.as_ref().ok_or_else(|| fmt_err("grid", "velocity reconstruction needs a grid"))?.grid3()?;
                if g.boundary != Boundary::Periodic {
                    return Err(fmt_err("grid.boundary", "velocity reconstruction needs a periodic grid"));
                }
                let w = omega.as_ref().ok_or_else(|| fmt_err("velocity", "velocity reconstruction needs Omega"))?;
                let s = w.sample(&g);
                let (sv, psi) = SpectralVelocity::from_vorticity(&g, [&s.data[0], &s.data[1], &s.data[2]])?;
                match how {
                    VelocityFrom::BiotSavart => FieldSource::Spectral(SpectralField::new(sv)),
                    VelocityFrom::BiotSavartPotential => {
                        let pg = Grid3 { boundary: Boundary::DecayToZero, ..g };
                        let pot = SampledField::new(pg, Rank::Vector, psi.to_vec(), Interp::Cubic)?.with_far_exponent(ku);
                        FieldSource::CurlOfPotential(Arc::new(pot))
                    }
                }
            }
        };
        let mut p = Profile::new(self.gamma, u)?;
        if let Some(w) = omega {
            p = p.with_omega(w)?;
        }
        if let Some(pr) = self.source("P", Rank::Scalar, kp)? {
            p = p.with_pressure(pr)?;
        }
        if let Some(c) = self.c_flat {
            p = p.with_c_flat(c)?;
        }
        Ok(p)
    }

    fn build_axisym(&self) -> Result<AxisymProfile> {
        if let Some(m) = &self.meridional {
            if !self.arrays.is_empty() {
                return Err(fmt_err("meridional", "closed form and arrays are exclusive"));
            }
            return AxisymProfile::from_meridional(self.gamma, m.clone());
        }
        let g = self.grid.as_ref().ok_or_else(|| fmt_err("grid", "missing"))?.grid2()?;
        let need = |n: &str| self.array(n).cloned().ok_or_else(|| fmt_err(format!("array.{n}"), "missing"));
        let u = [need("U_r")?, need("U_theta")?, need("U_z")?];
        let om: Vec<Option<&Vec<f64>>> = ["Omega_r", "Omega_theta", "Omega_z"].iter().map(|n| self.array(n)).collect();
        let omega = match (om[0], om[1], om[2]) {
            (Some(a), Some(b), Some(c)) => Some([a.clone(), b.clone(), c.clone()]),
            (None, None, None) => None,
            _ => return Err(fmt_err("array.Omega_r", "vorticity needs all three components")),
        };
        AxisymProfile::from_sampled(self.gamma, g, u, omega, self.array("P").cloned())
    }
}

pub enum LoadedProfile {
    Cartesian(Profile),
    Axisym(AxisymProfile),
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

fn num(v: Option<&Value>, field: &str) -> Result<Option<f64>> {
    match v {
        None => Ok(None),
        Some(Value::Float(f)) if f.is_finite() => Ok(Some(*f)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(_) => Err(fmt_err(field, "expected a finite number")),
    }
}

fn uint(v: Option<&Value>, field: &str) -> Result<usize> {
    match v {
        Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
        Some(_) => Err(fmt_err(field, "expected a nonnegative integer")),
        None => Err(fmt_err(field, "missing")),
    }
}

fn parse_grid(g: &Table, ndim: usize) -> Result<GridRecord> {
    let list = |k: &str| -> Result<Vec<f64>> {
        let field = format!("grid.{k}");
        let a = g.get(k).and_then(Value::as_array).ok_or_else(|| fmt_err(&field, "missing array"))?;
        if a.len() != ndim {
            return Err(fmt_err(&field, format!("expected {ndim} entries, found {}", a.len())));
        }
        a.iter().map(|v| num(Some(v), &field).map(|x| x.unwrap_or(0.0))).collect()
    };
    let dims_f = list("dims")?;
    if dims_f.iter().any(|&d| d.fract() != 0.0 || d < 4.0) {
        return Err(fmt_err("grid.dims", "entries must be integers >= 4"));
    }
    let spacing = list("spacing")?;
    if spacing.iter().any(|&h| !(h > 0.0)) {
        return Err(fmt_err("grid.spacing", "entries must be positive"));
    }
    let origin = list("origin")?;
    let boundary = match g.get("boundary") {
        None => Boundary::DecayToZero,
        Some(v) => v.as_str().and_then(Boundary::parse).ok_or_else(|| fmt_err("grid.boundary", "expected \"decay-to-zero\" or \"periodic\""))?,
    };
    if ndim == 2 && origin[0] < 0.0 {
        return Err(fmt_err("grid.origin", "meridional grids need r >= 0"));
    }
    Ok(GridRecord { dims: dims_f.iter().map(|&d| d as usize).collect(), spacing, origin, boundary })
}

pub fn read_profile(path: &std::path::Path) -> Result<(ProfileDoc, LoadedProfile)> {
    let bytes = std::fs::read(path)?;
    let doc = ProfileDoc::from_bytes(&bytes)?;
    let p = doc.build()?;
    Ok((doc, p))
}

pub fn write_profile(path: &std::path::Path, doc: &ProfileDoc) -> Result<()> {
    std::fs::write(path, doc.to_bytes()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Vec3;

    fn sampled_doc() -> ProfileDoc {
        let g = Grid3::cube(2.0, 8).unwrap();
        let mut doc = ProfileDoc::new(0.4, Symmetry::Cartesian);
        doc.grid = Some(GridRecord::from_grid3(&g));
        let n = g.len();
        let u: Vec<f64> = (0..3 * n).map(|i| (i as f64 * 0.37).sin()).collect();
        doc.arrays.push(("U".into(), u));
        doc.analytic.push(("Omega".into(), Analytic::Gaussian { amp: 2.0, width: 1.0, dir: Some([0.0, 0.0, 1.0]) }));
        doc.meta.insert("family".into(), "test".into());
        doc
    }

    #[test]
    fn roundtrip_is_lossless() {
        let doc = sampled_doc();
        let bytes = doc.to_bytes().unwrap();
        let back = ProfileDoc::from_bytes(&bytes).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_bytes().unwrap(), bytes);
        let LoadedProfile::Cartesian(p) = back.build().unwrap() else { panic!() };
        let g = p.u.grid().unwrap();
        let y = g.point(3, 4, 5);
        let n = g.index(3, 4, 5);
        assert_eq!(p.u.value(&y)[1], doc.arrays[0].1[g.len() + n]);
        assert!((p.omega_at(&Vec3::zeros())[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn first_offending_field_is_named() {
        let cases = [
            ("format = \"ssp-2\"\ngamma = 0.4\nend_header\n", "format"),
            ("format = \"ssp-1\"\nend_header\n", "gamma"),
            ("format = \"ssp-1\"\ngamma = -1.0\nend_header\n", "gamma"),
            ("format = \"ssp-1\"\ngamma = 0.4\nsymmetry = \"polar\"\nend_header\n", "symmetry"),
            ("format = \"ssp-1\"\ngamma = 0.4\ninterp = 2\nend_header\n", "interp"),
            ("format = \"ssp-1\"\ngamma = 0.4\n[grid]\ndims = [8, 8]\nspacing = [1.0, 1.0, 1.0]\norigin = [0.0, 0.0, 0.0]\nend_header\n", "grid.dims"),
            ("format = \"ssp-1\"\ngamma = 0.4\nbogus = 1\nend_header\n", "bogus"),
            ("format = \"ssp-1\"\ngamma = 0.4\n", "end_header"),
        ];
        for (text, field) in cases {
            match ProfileDoc::from_bytes(text.as_bytes()) {
                Err(Error::Format { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {:?}", other.map(|_| ())),
            }
        }
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let mut bytes = sampled_doc().to_bytes().unwrap();
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(ProfileDoc::from_bytes(&bytes), Err(Error::Format { field, .. }) if field == "array[0].offset"));
    }

    #[test]
    fn axisym_closed_form() {
        let mut doc = ProfileDoc::new(0.4, Symmetry::Axisym);
        doc.meridional = Some(Meridional::LinearStrain { a: 0.1 });
        let back = ProfileDoc::from_bytes(&doc.to_bytes().unwrap()).unwrap();
        assert_eq!(back, doc);
        let LoadedProfile::Axisym(p) = back.build().unwrap() else { panic!() };
        assert!((p.u_r.value(1.5, 0.0) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn axisym_sampled() {
        let g = Grid2::span((0.0, 2.0), (-1.0, 1.0), 9, 9).unwrap();
        let mut doc = ProfileDoc::new(0.4, Symmetry::Axisym);
        doc.grid = Some(GridRecord::from_grid2(&g));
        for n in ["U_r", "U_theta", "U_z"] {
            doc.arrays.push((n.into(), vec![0.0; g.len()]));
        }
        let back = ProfileDoc::from_bytes(&doc.to_bytes().unwrap()).unwrap();
        assert!(matches!(back.build().unwrap(), LoadedProfile::Axisym(_)));
        doc.arrays.pop();
        assert!(matches!(doc.build(), Err(Error::Format { field, .. }) if field == "array.U_z"));
    }
}
