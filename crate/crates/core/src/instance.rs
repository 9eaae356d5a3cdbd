//! The instance file format: JSON with complex entries written as `[re, im]` pairs.
//!
//! Matrices are lists of rows. Algebras are given by basis matrices; modules by one
//! action matrix and one Gram matrix per basis element of their algebra (the Gram matrix
//! `G_k` holds the `k`-th coordinate of `⟨e_i|e_j⟩`). Coactions and connections are
//! written on full coordinates `z_i ⊗ f_p* ⊗ f_q`, indexed `(i * m + p) * m + q`.

use crate::algebra::{AlgebraRef, FiniteCStarAlgebra, Inclusion};
use crate::coalgebra::Coalgebra;
use crate::comodule::Comodule;
use crate::connection::{Connection, Dictionary, Omega};
use crate::error::{Error, Kind, Result};
use crate::linalg::{self, kron_apply, max_abs, Tolerance};
use crate::module::{Correspondence, HilbertModule};
use crate::pair::AdjointPair;
use crate::scalar::{cx, f64_of, CMat, Real};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const FORMAT_VERSION: &str = "cstar-descent/1";

pub type MatrixData = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceData>,
    #[serde(default)]
    pub algebras: Vec<AlgebraData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inclusions: Vec<InclusionData>,
    #[serde(default)]
    pub modules: Vec<ModuleData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub correspondences: Vec<CorrespondenceData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comodules: Vec<ComoduleData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub connections: Vec<ConnectionData>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceData {
    pub absolute: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraData {
    pub name: String,
    pub basis: Vec<MatrixData>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionData {
    pub name: String,
    pub sub: String,
    pub amb: String,
    /// Column `i` holds the coordinates in `amb` of basis element `i` of `sub`.
    pub embedding: MatrixData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleData {
    pub name: String,
    pub algebra: String,
    pub action: Vec<MatrixData>,
    pub gram: Vec<MatrixData>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceData {
    pub name: String,
    pub left_algebra: String,
    pub module: String,
    pub left_action: Vec<MatrixData>,
}

/// The coalgebra a comodule or connection lives over: either a named correspondence or
/// a named inclusion (with `F = B`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairRef {
    Correspondence(String),
    Inclusion(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComoduleData {
    pub name: String,
    pub module: String,
    pub over: PairRef,
    pub coaction: MatrixData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionData {
    pub name: String,
    pub module: String,
    pub inclusion: String,
    pub nabla: MatrixData,
}

fn parse_error(detail: impl Into<String>) -> Error {
    Error::new(Kind::ParseError, detail)
}

fn unresolved(kind: &str, name: &str) -> Error {
    Error::new(Kind::UnresolvedReference, format!("no {kind} named '{name}'"))
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
            parse_error(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        if file.version != FORMAT_VERSION {
            return Err(parse_error(format!(
                "field 'version': expected '{FORMAT_VERSION}', found '{}'",
                file.version
            )));
        }
        file.check_references()?;
        Ok(file)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_error(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn new(name: impl Into<String>) -> Self {
        InstanceFile {
            version: FORMAT_VERSION.into(),
            name: name.into(),
            tolerance: None,
            algebras: Vec::new(),
            inclusions: Vec::new(),
            modules: Vec::new(),
            correspondences: Vec::new(),
            comodules: Vec::new(),
            connections: Vec::new(),
        }
    }

    fn check_references(&self) -> Result<()> {
        let alg = |n: &str| self.algebras.iter().any(|a| a.name == n);
        let module = |n: &str| self.modules.iter().any(|a| a.name == n);
        let inc = |n: &str| self.inclusions.iter().any(|a| a.name == n);
        let corr = |n: &str| self.correspondences.iter().any(|a| a.name == n);
        for i in &self.inclusions {
            for n in [&i.sub, &i.amb] {
                if !alg(n) {
                    return Err(unresolved("algebra", n));
                }
            }
        }
        for m in &self.modules {
            if !alg(&m.algebra) {
                return Err(unresolved("algebra", &m.algebra));
            }
        }
        for c in &self.correspondences {
            if !alg(&c.left_algebra) {
                return Err(unresolved("algebra", &c.left_algebra));
            }
            if !module(&c.module) {
                return Err(unresolved("module", &c.module));
            }
        }
        let pair_ok = |p: &PairRef| match p {
            PairRef::Correspondence(n) => corr(n).then_some(()).ok_or_else(|| unresolved("correspondence", n)),
            PairRef::Inclusion(n) => inc(n).then_some(()).ok_or_else(|| unresolved("inclusion", n)),
        };
        for c in &self.comodules {
            if !module(&c.module) {
                return Err(unresolved("module", &c.module));
            }
            pair_ok(&c.over)?;
        }
        for c in &self.connections {
            if !module(&c.module) {
                return Err(unresolved("module", &c.module));
            }
            if !inc(&c.inclusion) {
                return Err(unresolved("inclusion", &c.inclusion));
            }
        }
        Ok(())
    }
}

/// Dense matrix from rows; ragged input is a shape mismatch naming `field`.
pub fn matrix_from<T: Real>(data: &MatrixData, field: &str) -> Result<CMat<T>> {
    let rows = data.len();
    let cols = data.first().map(|r| r.len()).unwrap_or(0);
    if data.iter().any(|r| r.len() != cols) {
        return Err(Error::new(Kind::ShapeMismatch, format!("{field}: rows of unequal length")));
    }
    if data.iter().flatten().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(parse_error(format!("{field}: non-finite entry")));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| cx(data[i][j][0], data[i][j][1])))
}

pub fn matrix_data<T: Real>(m: &CMat<T>) -> MatrixData {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [f64_of(m[(i, j)].re), f64_of(m[(i, j)].im)]).collect())
        .collect()
}

fn square<T: Real>(data: &MatrixData, field: &str, n: Option<usize>) -> Result<CMat<T>> {
    let m = matrix_from::<T>(data, field)?;
    if m.nrows() != m.ncols() || n.is_some_and(|n| n != m.nrows()) {
        return Err(Error::new(
            Kind::ShapeMismatch,
            format!("{field}: {}x{} matrix where a square one of size {} is required", m.nrows(), m.ncols(), n.map_or("n".into(), |n| n.to_string())),
        ));
    }
    Ok(m)
}

/// Validated objects of an instance file.
#[derive(Clone, Debug)]
pub struct Resolved<T: Real> {
    pub file: InstanceFile,
    pub tol: Tolerance,
    pub algebras: BTreeMap<String, AlgebraRef<T>>,
    pub inclusions: BTreeMap<String, Inclusion<T>>,
    pub modules: BTreeMap<String, HilbertModule<T>>,
    pub correspondences: BTreeMap<String, Correspondence<T>>,
}

impl<T: Real> Resolved<T> {
    /// `tol` overrides the tolerance stored in the file.
    pub fn new(file: InstanceFile, tol: Option<Tolerance>) -> Result<Self> {
        let tol = tol
            .or(file.tolerance.map(|t| Tolerance::new(t.absolute, t.relative)))
            .unwrap_or_else(Tolerance::default_for::<T>);
        let mut algebras = BTreeMap::new();
        for a in &file.algebras {
            let basis = a
                .basis
                .iter()
                .enumerate()
                .map(|(k, b)| square::<T>(b, &format!("algebras.{}.basis[{k}]", a.name), None))
                .collect::<Result<Vec<_>>>()?;
            algebras.insert(a.name.clone(), Arc::new(FiniteCStarAlgebra::validate(basis, tol)?));
        }
        let mut inclusions = BTreeMap::new();
        for i in &file.inclusions {
            let emb = matrix_from::<T>(&i.embedding, &format!("inclusions.{}.embedding", i.name))?;
            let inc = Inclusion::check(algebras[&i.sub].clone(), algebras[&i.amb].clone(), emb, tol)?;
            inclusions.insert(i.name.clone(), inc);
        }
        let mut modules = BTreeMap::new();
        for m in &file.modules {
            let alg: &AlgebraRef<T> = &algebras[&m.algebra];
            let dim = m.action.first().map(|a| a.len());
            let mats = |list: &[MatrixData], what: &str| {
                list.iter()
                    .enumerate()
                    .map(|(k, x)| square::<T>(x, &format!("modules.{}.{what}[{k}]", m.name), dim))
                    .collect::<Result<Vec<_>>>()
            };
            let action = mats(&m.action, "action")?;
            let gram = mats(&m.gram, "gram")?;
            if action.len() != alg.dim() || gram.len() != alg.dim() {
                return Err(Error::new(
                    Kind::ShapeMismatch,
                    format!("modules.{}: need {} action and gram matrices", m.name, alg.dim()),
                ));
            }
            modules.insert(m.name.clone(), HilbertModule::validate(alg.clone(), action, gram, tol)?);
        }
        let mut correspondences = BTreeMap::new();
        for c in &file.correspondences {
            let module: HilbertModule<T> = modules[&c.module].clone();
            let left = c
                .left_action
                .iter()
                .enumerate()
                .map(|(k, x)| square::<T>(x, &format!("correspondences.{}.left_action[{k}]", c.name), Some(module.dim())))
                .collect::<Result<Vec<_>>>()?;
            let f = Correspondence::new(algebras[&c.left_algebra].clone(), module, left, tol)?;
            correspondences.insert(c.name.clone(), f);
        }
        Ok(Resolved { file, tol, algebras, inclusions, modules, correspondences })
    }

    pub fn pair(&self, over: &PairRef) -> Result<AdjointPair<T>> {
        match over {
            PairRef::Correspondence(n) => AdjointPair::from_correspondence(
                self.correspondences.get(n).ok_or_else(|| unresolved("correspondence", n))?.clone(),
                self.tol,
            ),
            PairRef::Inclusion(n) => AdjointPair::from_inclusion(
                self.inclusions.get(n).ok_or_else(|| unresolved("inclusion", n))?,
                self.tol,
            ),
        }
    }

    pub fn coalgebra(&self, over: &PairRef) -> Result<Arc<Coalgebra<T>>> {
        Ok(Arc::new(Coalgebra::build(Arc::new(self.pair(over)?))?))
    }

    /// Every coalgebra referenced by a comodule or connection, built once.
    pub fn coalgebras(&self) -> Result<BTreeMap<PairRef, Arc<Coalgebra<T>>>> {
        let mut out = BTreeMap::new();
        let refs = self
            .file
            .comodules
            .iter()
            .map(|c| c.over.clone())
            .chain(self.file.connections.iter().map(|c| PairRef::Inclusion(c.inclusion.clone())));
        for r in refs {
            if !out.contains_key(&r) {
                let co = self.coalgebra(&r)?;
                out.insert(r, co);
            }
        }
        Ok(out)
    }

    /// The comodule's axioms are assessed, not enforced.
    pub fn comodule(&self, data: &ComoduleData, co: &Coalgebra<T>) -> Result<Comodule<T>> {
        let module = self.modules[&data.module].clone();
        let full = matrix_from::<T>(&data.coaction, &format!("comodules.{}.coaction", data.name))?;
        let m = co.pair.m();
        if full.shape() != (module.dim() * m * m, module.dim()) {
            return Err(Error::new(
                Kind::ShapeMismatch,
                format!(
                    "comodules.{}.coaction: {}x{}, expected {}x{}",
                    data.name,
                    full.nrows(),
                    full.ncols(),
                    module.dim() * m * m,
                    module.dim()
                ),
            ));
        }
        Comodule::from_full(module, &full, co)
    }

    /// Reads `∇`, which must take values in `Z ⊗_B Ω`.
    pub fn connection(&self, data: &ConnectionData, omega: &Omega<T>) -> Result<(Connection<T>, Dictionary<T>)> {
        let module = self.modules[&data.module].clone();
        let field = format!("connections.{}.nabla", data.name);
        let full = matrix_from::<T>(&data.nabla, &field)?;
        let m = omega.co.pair.m();
        if full.shape() != (module.dim() * m * m, module.dim()) {
            return Err(Error::new(Kind::ShapeMismatch, format!("{field}: wrong shape")));
        }
        let dict = Dictionary::new(module.clone(), omega)?;
        let lifted = kron_apply(&linalg::identity(module.dim()), &omega.co.c().space.proj, &full);
        let split = dict.zc.space.project(&lifted);
        let stray = max_abs(&split.rows(dict.omega_dim(), module.dim()));
        if stray > self.tol.threshold(max_abs(&full).max(1.0)) {
            return Err(Error::new(
                Kind::ShapeMismatch,
                format!("{field}: values leave Z ⊗ Ω by {stray:.3e}"),
            ));
        }
        let nabla = dict.connection_of(&split);
        let conn = Connection::validate(module, nabla, omega, Some(dict.zomega.clone()))?;
        Ok((conn, dict))
    }
}

/// `∇` on full coordinates of `Z ⊗ F* ⊗ F`, as read back by `Resolved::connection`.
pub fn connection_full<T: Real>(conn: &Connection<T>, dict: &Dictionary<T>, co: &Coalgebra<T>) -> CMat<T> {
    let dz = conn.module.dim();
    let mut split = CMat::zeros(dict.zc.dim(), dz);
    split.rows_mut(0, dict.omega_dim()).copy_from(&conn.nabla);
    let lifted = dict.zc.space.lift(&split);
    kron_apply(&linalg::identity(dz), &co.c().space.reps, &lifted)
}

pub fn algebra_data<T: Real>(name: &str, a: &FiniteCStarAlgebra<T>) -> AlgebraData {
    AlgebraData { name: name.into(), basis: a.basis().iter().map(matrix_data).collect() }
}

pub fn module_data<T: Real>(name: &str, algebra: &str, x: &HilbertModule<T>) -> ModuleData {
    ModuleData {
        name: name.into(),
        algebra: algebra.into(),
        action: x.action().iter().map(matrix_data).collect(),
        gram: x.gram().iter().map(matrix_data).collect(),
    }
}

/// A gallery instance written out: `A`, `B`, the inclusion or correspondence, the
/// standard modules and, when given, comodules over its coalgebra.
pub fn from_gallery<T: Real>(
    inst: &crate::gallery::Instance<T>,
    comodules: &[(&str, &Comodule<T>)],
    co: Option<&Coalgebra<T>>,
) -> Result<InstanceFile> {
    let mut file = InstanceFile::new(inst.name.clone());
    let f = &inst.correspondence;
    file.algebras.push(algebra_data("A", &f.left_algebra));
    file.algebras.push(algebra_data("B", f.module.algebra()));
    let over = match &inst.inclusion {
        Some(inc) => {
            file.inclusions.push(InclusionData {
                name: "inc".into(),
                sub: "A".into(),
                amb: "B".into(),
                embedding: matrix_data(&inc.embedding),
            });
            PairRef::Inclusion("inc".into())
        }
        None => {
            file.modules.push(module_data("F", "B", &f.module));
            file.correspondences.push(CorrespondenceData {
                name: "F".into(),
                left_algebra: "A".into(),
                module: "F".into(),
                left_action: f.left_action.iter().map(matrix_data).collect(),
            });
            PairRef::Correspondence("F".into())
        }
    };
    for (name, x) in inst.standard_modules()? {
        file.modules.push(module_data(&name, "A", &x));
    }
    if !comodules.is_empty() {
        let co = co.ok_or_else(|| Error::new(Kind::InvalidArgument, "comodules need their coalgebra"))?;
        for (name, z) in comodules {
            let module_name = format!("{name}.module");
            file.modules.push(module_data(&module_name, "B", &z.module));
            file.comodules.push(ComoduleData {
                name: name.to_string(),
                module: module_name,
                over: over.clone(),
                coaction: matrix_data(&z.to_full(co)),
            });
        }
    }
    Ok(file)
}
