//! Python bindings for `cocart`.
//!
//! Categories are immutable `Category` objects addressed by arrow labels.
//! A `Workspace` holds a parsed, resolved file; constructions that can run out
//! of budget raise `Truncated`, everything else raises `CocartError`.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cocart::dsl::{self, category_decl, emit_dsl, fibration_file, resolve, Workspace as Resolved, WorkspaceFile};
use cocart::emit::{dot_fibration, dot_fincat, size};
use cocart::fibration::{cocartesian_arrows, conduche_witness, is_cocartesian_fibration, straighten_finite, MarkedFibration};
use cocart::fincat::{ArrId, FinCat};
use cocart::functor::Functor;
use cocart::join::join_tower;
use cocart::presentation::localize;
use cocart::suites::{self, Bounds, Kind};
use cocart::universe::univalent_completion;

create_exception!(cocart, CocartError, PyException);
create_exception!(cocart, Truncated, CocartError);

fn err(e: impl ToString) -> PyErr {
    CocartError::new_err(e.to_string())
}

fn arrow(c: &FinCat, label: &str) -> PyResult<ArrId> {
    c.find_arrow(label).ok_or_else(|| err(format!("no arrow {label:?} in {}", c.name())))
}

/// A finite category.
#[pyclass(frozen, skip_from_py_object, name = "Category", module = "cocart")]
#[derive(Clone)]
pub struct Category {
    inner: Arc<FinCat>,
}

impl Category {
    fn wrap(c: Arc<FinCat>) -> Self {
        Category { inner: c }
    }
}

#[pymethods]
impl Category {
    /// A built-in example by name, such as `"I"`, `"J"` or `"Idem"`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        cocart::fixtures::library()
            .into_iter()
            .find(|c| c.name() == name)
            .map(|c| Category::wrap(Arc::new(c)))
            .ok_or_else(|| err(format!("no fixture {name:?}")))
    }

    #[staticmethod]
    fn fixture_names() -> Vec<String> {
        cocart::fixtures::library().iter().map(|c| c.name().to_string()).collect()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn objects(&self) -> Vec<String> {
        self.inner.objects().to_vec()
    }

    /// `(label, source, target)` for every arrow, identities included.
    #[getter]
    fn arrows(&self) -> Vec<(String, String, String)> {
        let c = &self.inner;
        (0..c.num_arrows())
            .map(|a| (c.arr_label(a).to_string(), c.obj_label(c.src(a)).to_string(), c.obj_label(c.tgt(a)).to_string()))
            .collect()
    }

    fn num_objects(&self) -> usize {
        self.inner.num_objects()
    }

    fn num_arrows(&self) -> usize {
        self.inner.num_arrows()
    }

    fn identity(&self, object: &str) -> PyResult<String> {
        let c = &self.inner;
        let x = c.find_object(object).ok_or_else(|| err(format!("no object {object:?} in {}", c.name())))?;
        Ok(c.arr_label(c.id(x)).to_string())
    }

    /// `g . f`, or `None` when the arrows are not composable.
    fn compose(&self, g: &str, f: &str) -> PyResult<Option<String>> {
        let c = &self.inner;
        Ok(c.try_compose(arrow(c, g)?, arrow(c, f)?).map(|h| c.arr_label(h).to_string()))
    }

    fn inverse(&self, f: &str) -> PyResult<Option<String>> {
        let c = &self.inner;
        Ok(c.inverse(arrow(c, f)?).map(|h| c.arr_label(h).to_string()))
    }

    fn hom(&self, x: &str, y: &str) -> PyResult<Vec<String>> {
        let c = &self.inner;
        let find = |o: &str| c.find_object(o).ok_or_else(|| err(format!("no object {o:?} in {}", c.name())));
        Ok(c.hom(find(x)?, find(y)?).iter().map(|&a| c.arr_label(a).to_string()).collect())
    }

    fn is_groupoid(&self) -> bool {
        self.inner.is_groupoid()
    }

    /// Raises `CocartError` naming the first violated law.
    fn verify_laws(&self) -> PyResult<()> {
        self.inner.verify_laws().map_err(err)
    }

    /// Invert `arrows`, raising `Truncated` if words longer than
    /// `max_word_len` would be needed.
    #[pyo3(signature = (arrows, max_word_len = 12))]
    fn localize(&self, py: Python<'_>, arrows: Vec<String>, max_word_len: usize) -> PyResult<Category> {
        let c = &self.inner;
        let w = arrows.iter().map(|a| arrow(c, a)).collect::<PyResult<Vec<_>>>()?;
        let loc = py.detach(|| localize(c, &w, max_word_len)).map_err(err)?;
        match loc.saturation.exact() {
            Some(lc) => Ok(Category::wrap(lc.clone())),
            None => Err(Truncated::new_err(format!("normal form counts by length {:?}", loc.saturation.growth))),
        }
    }

    fn to_dsl(&self) -> String {
        emit_dsl(&WorkspaceFile { categories: vec![category_decl(&self.inner)], ..Default::default() })
    }

    fn to_dot(&self) -> String {
        dot_fincat(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("<Category {:?}: {}>", self.inner.name(), size(&self.inner))
    }
}

/// A parsed workspace file with every reference resolved.
#[pyclass(frozen, name = "Workspace", module = "cocart")]
pub struct Workspace {
    inner: Resolved,
}

impl Workspace {
    fn functor(&self, name: &str) -> PyResult<&Functor> {
        self.inner.functor(name).ok_or_else(|| err(format!("no functor {name:?}")))
    }

    fn fibration(&self, name: &str) -> PyResult<&MarkedFibration> {
        self.inner.fibration(name).ok_or_else(|| err(format!("no fibration {name:?}")))
    }

    fn from_file(file: WorkspaceFile) -> PyResult<Self> {
        let names = suites::suite_names();
        Ok(Workspace { inner: resolve(file, &names).map_err(err)? })
    }
}

#[pymethods]
impl Workspace {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Workspace::from_file(dsl::parse_str(text).map_err(err)?)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Workspace::from_file(dsl::parse(path).map_err(err)?)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Workspace::from_file(dsl::parse_json(text.as_bytes()).map_err(err)?)
    }

    fn categories(&self) -> Vec<String> {
        self.inner.file.categories.iter().map(|c| c.raw.name.clone()).collect()
    }

    fn functors(&self) -> Vec<String> {
        self.inner.file.functors.iter().map(|f| f.name.clone()).collect()
    }

    fn fibrations(&self) -> Vec<String> {
        self.inner.file.fibrations.iter().map(|f| f.name.clone()).collect()
    }

    fn category(&self, name: &str) -> PyResult<Category> {
        self.inner.category(name).cloned().map(Category::wrap).ok_or_else(|| err(format!("no category {name:?}")))
    }

    /// Image of an object or arrow label under a functor.
    fn apply(&self, functor: &str, label: &str) -> PyResult<String> {
        let f = self.functor(functor)?;
        if let Some(x) = f.dom.find_object(label) {
            return Ok(f.cod.obj_label(f.obj[x]).to_string());
        }
        Ok(f.cod.arr_label(f.arr[arrow(&f.dom, label)?]).to_string())
    }

    fn is_cocartesian_fibration(&self, functor: &str) -> PyResult<bool> {
        Ok(is_cocartesian_fibration(self.functor(functor)?).is_ok())
    }

    /// Labels of the non-identity cocartesian arrows of a functor.
    fn cocartesian_arrows(&self, functor: &str) -> PyResult<Vec<String>> {
        let p = self.functor(functor)?;
        Ok(cocartesian_arrows(p).into_iter().filter(|&a| !p.dom.is_identity(a)).map(|a| p.dom.arr_label(a).to_string()).collect())
    }

    /// `None` when the functor is Conduché, else `(x, c, z)` with `p(x) -> c -> p(z)`
    /// a factorisation that does not lift.
    fn conduche_witness(&self, functor: &str) -> PyResult<Option<(String, String, String)>> {
        let p = self.functor(functor)?;
        Ok(conduche_witness(p).map(|(x, c, z)| (p.dom.obj_label(x).to_string(), p.cod.obj_label(c).to_string(), p.dom.obj_label(z).to_string())))
    }

    /// Fibres of a marked fibration, keyed by base object.
    fn straighten<'py>(&self, py: Python<'py>, fibration: &str) -> PyResult<Bound<'py, PyDict>> {
        let pf = straighten_finite(self.fibration(fibration)?);
        let out = PyDict::new(py);
        for (x, fc) in pf.fibres.iter().enumerate() {
            out.set_item(pf.base.obj_label(x), Category::wrap(fc.clone()))?;
        }
        Ok(out)
    }

    #[pyo3(signature = (f, g0, max_stages = 6, max_word_len = 12))]
    fn join<'py>(&self, py: Python<'py>, f: &str, g0: &str, max_stages: usize, max_word_len: usize) -> PyResult<Bound<'py, PyDict>> {
        let (ff, gg) = (self.functor(f)?, self.functor(g0)?);
        let t = py.detach(|| join_tower(ff, gg, max_stages, max_word_len)).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("stable_stage", t.stable_stage)?;
        out.set_item("fully_faithful", t.fully_faithful)?;
        out.set_item("image_matches", t.image_matches)?;
        out.set_item("verified", t.verified())?;
        out.set_item("limit", t.limit.as_ref().map(|g| Category::wrap(g.dom.clone())))?;
        Ok(out)
    }

    /// Univalent completion of `p` starting from `q0`; the universe comes
    /// back as workspace DSL text.
    #[pyo3(signature = (p, q0, max_stages = 6, max_word_len = 12))]
    fn complete<'py>(&self, py: Python<'py>, p: &str, q0: &str, max_stages: usize, max_word_len: usize) -> PyResult<Bound<'py, PyDict>> {
        let (mp, mq) = (self.fibration(p)?, self.fibration(q0)?);
        let t = py.detach(|| univalent_completion(mp, mq, max_stages, max_word_len)).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("stable_stage", t.stable_stage)?;
        out.set_item("directed_univalent", t.directed_univalent)?;
        out.set_item("same_fibres", t.same_fibres)?;
        out.set_item("verified", t.verified())?;
        out.set_item("universe", t.universe.as_ref().map(|u| emit_dsl(&fibration_file(&format!("{p}.universe"), u))))?;
        Ok(out)
    }

    fn fibration_dot(&self, fibration: &str) -> PyResult<String> {
        Ok(dot_fibration(self.fibration(fibration)?))
    }

    fn to_dsl(&self) -> String {
        emit_dsl(&self.inner.file)
    }

    fn to_json(&self) -> String {
        String::from_utf8(dsl::emit_json(&self.inner.file)).expect("JSON is UTF-8")
    }

    fn __repr__(&self) -> String {
        let f = &self.inner.file;
        format!(
            "<Workspace: {} categories, {} functors, {} fibrations>",
            f.categories.len(),
            f.functors.len(),
            f.fibrations.len()
        )
    }
}

#[pyfunction]
fn suite_names() -> Vec<String> {
    suites::suite_names().into_iter().map(String::from).collect()
}

/// Run a suite by name or criterion number and return its JSON report.
#[pyfunction]
#[pyo3(signature = (name, seed = 0, max_word_len = 12, max_stages = 6, max_iterations = 16))]
fn run_suite(py: Python<'_>, name: &str, seed: u64, max_word_len: usize, max_stages: usize, max_iterations: usize) -> PyResult<String> {
    let suite = suites::find_suite(name).ok_or_else(|| err(format!("unknown suite {name:?}")))?;
    let bounds = Bounds { seed, max_word_len, max_stages, max_iterations };
    String::from_utf8(py.detach(|| suites::run(&suite, &bounds)).to_json()).map_err(err)
}

/// A seeded random instance as DSL text, with the arrows to invert for
/// `localisation-instance`.
#[pyfunction]
#[pyo3(signature = (kind, seed = 0, size = 3))]
fn generate(kind: &str, seed: u64, size: usize) -> PyResult<(String, Option<Vec<String>>)> {
    let kind = match kind {
        "fincat" => Kind::Fincat,
        "opfibration" => Kind::Opfibration,
        "localisation-instance" => Kind::LocalisationInstance,
        other => return Err(err(format!("unknown kind {other:?}"))),
    };
    let g = suites::generate(kind, seed, size);
    Ok((emit_dsl(&g.file), g.w))
}

#[pymodule]
#[pyo3(name = "cocart")]
fn cocart_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Category>()?;
    m.add_class::<Workspace>()?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add("CocartError", m.py().get_type::<CocartError>())?;
    m.add("Truncated", m.py().get_type::<Truncated>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_names_each_kind() {
        let (text, w) = generate("localisation-instance", 3, 3).unwrap();
        assert!(text.starts_with("category"));
        assert!(w.is_some());
        assert!(generate("fincat", 3, 3).unwrap().1.is_none());
        assert!(generate("presheaf", 3, 3).is_err());
    }

    #[test]
    fn generated_text_loads() {
        let (text, _) = generate("opfibration", 5, 3).unwrap();
        let ws = Workspace::parse(&text).unwrap();
        assert_eq!(ws.fibrations().len(), 1);
        let dot = ws.fibration_dot(&ws.fibrations()[0]).unwrap();
        assert!(dot.starts_with("digraph"));
    }

    #[test]
    fn localising_the_interval() {
        let i = Category::fixture("I").unwrap();
        let l = i.inner.clone();
        let loc = localize(&l, &[l.find_arrow("f").unwrap()], 12).unwrap();
        let c = Category::wrap(loc.saturation.exact().unwrap().clone());
        assert!(c.is_groupoid());
        assert_eq!((c.num_objects(), c.num_arrows()), (2, 4));
        assert_eq!(c.compose("f", "f").unwrap(), None);
    }
}
