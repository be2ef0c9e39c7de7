//! Python bindings for `rpmargin`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rpmargin::montecarlo::{self, MarginMode, RejectionCurve, TrialConfig};
use rpmargin::{bounds, datasets, format, margin, repro, Family, LabeledDataset, LinearWitness, MarginKind, Vector};

fn err(e: rpmargin::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(v: Vec<f64>) -> PyResult<Vector> {
    Vector::new(v).map_err(err)
}

fn family(name: &str) -> PyResult<Family> {
    name.parse().map_err(err)
}

fn kind(normalised: bool) -> MarginKind {
    if normalised {
        MarginKind::Normalised
    } else {
        MarginKind::Unnormalised
    }
}

/// Dense `n x d` projection matrix.
#[pyclass(name = "ProjectionMatrix", module = "rpmargin_py", frozen)]
struct PyProjectionMatrix(rpmargin::ProjectionMatrix);

#[pymethods]
impl PyProjectionMatrix {
    /// Entries `r_ij / sqrt(n)` with `r_ij` standard normal ("gaussian") or ±1 ("sign").
    #[staticmethod]
    #[pyo3(signature = (n, d, family="gaussian", seed=0))]
    fn sample(n: usize, d: usize, family: &str, seed: u64) -> PyResult<Self> {
        rpmargin::ProjectionMatrix::sample(n, d, self::family(family)?, seed)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(PyValueError::new_err("rows have different lengths"));
        }
        let n = rows.len();
        rpmargin::ProjectionMatrix::from_row_major(n, cols, rows.concat())
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn rows(&self) -> usize {
        self.0.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.0.cols()
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.entries().chunks(self.0.cols()).map(<[f64]>::to_vec).collect()
    }

    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.project(&vector(x)?).map_err(err)?.into_inner())
    }

    fn project_dataset(&self, data: &PyDataset) -> PyResult<PyDataset> {
        self.0.project_dataset(&data.0).map(PyDataset).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ProjectionMatrix(rows={}, cols={})", self.0.rows(), self.0.cols())
    }
}

/// Labeled points: binary labels ±1, or classes `1..=L` when `classes` is given.
#[pyclass(name = "Dataset", module = "rpmargin_py", frozen)]
struct PyDataset(LabeledDataset);

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (points, labels, classes=None))]
    fn new(points: Vec<Vec<f64>>, labels: Vec<i64>, classes: Option<usize>) -> PyResult<Self> {
        let pts = points.into_iter().map(vector).collect::<PyResult<Vec<_>>>()?;
        let d = match classes {
            Some(l) => LabeledDataset::multiclass(pts, labels, l),
            None => LabeledDataset::binary(pts, labels),
        };
        d.map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (text, classes=None))]
    fn from_csv(text: &str, classes: Option<usize>) -> PyResult<Self> {
        format::parse_dataset_csv(text, classes).map(Self).map_err(err)
    }

    fn to_csv(&self) -> String {
        format::dataset_to_csv(&self.0)
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points().iter().map(|p| p.as_slice().to_vec()).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<i64> {
        self.0.labels().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn classes(&self) -> usize {
        self.0.classes()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(len={}, dim={}, classes={})",
            self.0.len(),
            self.0.dim(),
            self.0.classes()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (data, u, normalised=true))]
fn binary_margin(data: &PyDataset, u: Vec<f64>, normalised: bool) -> PyResult<f64> {
    margin::binary_margin(&data.0, &vector(u)?, kind(normalised)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (data, witnesses, normalised=true))]
fn multiclass_margin(data: &PyDataset, witnesses: Vec<Vec<f64>>, normalised: bool) -> PyResult<f64> {
    let ws = witnesses.into_iter().map(vector).collect::<PyResult<Vec<_>>>()?;
    margin::multiclass_margin(&data.0, &ws, kind(normalised)).map_err(err)
}

/// Margin of the concatenated witness `[u_1; ...; u_L]`.
#[pyfunction]
#[pyo3(signature = (data, u, normalised=true))]
fn one_param_margin(data: &PyDataset, u: Vec<f64>, normalised: bool) -> PyResult<f64> {
    margin::one_param_margin(&data.0, &vector(u)?, kind(normalised)).map_err(err)
}

/// Maximum normalised binary margin: a dict with `margin`, `direction`,
/// `upper_bound`, `separable`, `converged` and `iterations`.
#[pyfunction]
fn optimize_binary_margin<'py>(py: Python<'py>, data: &PyDataset) -> PyResult<Bound<'py, PyDict>> {
    let r = margin::optimize_binary_margin(&data.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("margin", r.margin)?;
    d.set_item("direction", r.direction.into_inner())?;
    d.set_item("upper_bound", r.upper_bound)?;
    d.set_item("separable", r.separable)?;
    d.set_item("converged", r.converged)?;
    d.set_item("iterations", r.iterations)?;
    Ok(d)
}

#[pyfunction]
fn sweep_margin_2d(data: &PyDataset, num_angles: usize) -> PyResult<(Vec<f64>, f64)> {
    let (u, g) = margin::sweep_margin_2d(&data.0, num_angles).map_err(err)?;
    Ok((u.into_inner(), g))
}

#[pyfunction]
fn tail_success_prob(n: u64, eps: f64) -> PyResult<f64> {
    bounds::tail_success_prob(n, eps).map_err(err)
}

#[pyfunction]
fn chi2_tails(n: u64, eps: f64) -> PyResult<(f64, f64)> {
    bounds::chi2_tails(n, eps).map_err(err)
}

/// `(lo, hi)` enclosing the projected cosine of an acute pair.
#[pyfunction]
fn angle_distortion_interval(gamma: f64, eps: f64) -> PyResult<(f64, f64)> {
    let (iv, _) = bounds::angle_distortion_interval(gamma, eps).map_err(err)?;
    Ok((iv.lo, iv.hi))
}

#[pyfunction]
fn min_dim_binary(eps: f64, delta: f64, m: u64) -> PyResult<u64> {
    bounds::min_dim_binary(eps, delta, m).map_err(err)
}

#[pyfunction]
fn min_dim_multiclass(eps: f64, delta: f64, m: u64, classes: u64) -> PyResult<u64> {
    bounds::min_dim_multiclass(eps, delta, m, classes).map_err(err)
}

#[pyfunction]
fn min_dim_oneparam(eps: f64, delta: f64, m: u64, classes: u64) -> PyResult<u64> {
    bounds::min_dim_oneparam(eps, delta, m, classes).map_err(err)
}

#[pyfunction]
fn projected_margin_binary(gamma: f64, eps: f64) -> PyResult<f64> {
    Ok(bounds::projected_margin_binary(gamma, eps).map_err(err)?.margin)
}

#[pyfunction]
fn projected_margin_multiclass(gamma: f64, eps: f64) -> PyResult<f64> {
    Ok(bounds::projected_margin_multiclass(gamma, eps).map_err(err)?.margin)
}

#[pyfunction]
fn projected_margin_oneparam(gamma: f64, eps: f64, classes: u64) -> PyResult<f64> {
    Ok(bounds::projected_margin_oneparam(gamma, eps, classes)
        .map_err(err)?
        .margin)
}

#[pyfunction]
#[pyo3(signature = (gamma, rho, delta, c=1.0))]
fn balcan_min_dim(gamma: f64, rho: f64, delta: f64, c: f64) -> PyResult<f64> {
    bounds::balcan_min_dim(gamma, rho, delta, c).map_err(err)
}

#[pyfunction]
fn counterexample_square(s: f64) -> PyResult<PyDataset> {
    datasets::counterexample_square(s).map(PyDataset).map_err(err)
}

#[pyfunction]
fn separability_probability_1d(s: f64) -> PyResult<f64> {
    datasets::separability_probability_1d(s).map_err(err)
}

/// `(w, x)` unit vectors with cosine `gamma`.
#[pyfunction]
#[pyo3(signature = (d, gamma, seed=0))]
fn random_pair_with_cosine(d: usize, gamma: f64, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = datasets::random_pair_with_cosine(d, gamma, seed).map_err(err)?;
    Ok((p.w.into_inner(), p.x.into_inner()))
}

/// `(dataset, witnesses, target_margin)` for classes on parallel hyperplanes.
#[pyfunction]
#[pyo3(signature = (classes, per_class, d, gap=repro::HYPERPLANE_GAP, spread=repro::HYPERPLANE_SPREAD, seed=0))]
fn parallel_hyperplanes(
    classes: usize,
    per_class: usize,
    d: usize,
    gap: f64,
    spread: f64,
    seed: u64,
) -> PyResult<(PyDataset, Vec<Vec<f64>>, f64)> {
    let gm = datasets::parallel_hyperplanes(classes, per_class, d, gap, spread, seed).map_err(err)?;
    let LinearWitness::Multiclass(us) = &gm.witness else {
        unreachable!("hyperplane witnesses are per class")
    };
    let ws = us.iter().map(|u| u.as_slice().to_vec()).collect();
    Ok((PyDataset(gm.dataset), ws, gm.target_margin))
}

fn curve_rows<'py>(py: Python<'py>, c: &RejectionCurve) -> PyResult<Vec<Bound<'py, PyDict>>> {
    c.points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("n", p.n)?;
            d.set_item("epsilon", c.epsilon)?;
            d.set_item("trials", p.trials)?;
            d.set_item("rejections", p.rejections)?;
            d.set_item("p_hat", p.p_hat)?;
            d.set_item("ci_lo", p.ci_lo)?;
            d.set_item("ci_hi", p.ci_hi)?;
            d.set_item("theory_bound", p.theory_bound)?;
            Ok(d)
        })
        .collect()
}

fn config(n_grid: Vec<usize>, eps: f64, trials: usize, seed: u64, fam: &str) -> PyResult<TrialConfig> {
    let mut cfg = TrialConfig::new(n_grid, eps, trials, seed);
    cfg.family = family(fam)?;
    Ok(cfg)
}

fn pair(w: Vec<f64>, x: Vec<f64>) -> PyResult<datasets::GeneratedPair> {
    datasets::GeneratedPair::from_vectors(vector(w)?, vector(x)?).map_err(err)
}

/// Rejection curve of a pair: `statistic` is "angle", "inner" or "eq4".
#[pyfunction]
#[pyo3(signature = (statistic, w, x, n_grid, eps, trials, seed=0, family="gaussian"))]
#[allow(clippy::too_many_arguments)]
fn pair_curve<'py>(
    py: Python<'py>,
    statistic: &str,
    w: Vec<f64>,
    x: Vec<f64>,
    n_grid: Vec<usize>,
    eps: f64,
    trials: usize,
    seed: u64,
    family: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let p = pair(w, x)?;
    let cfg = config(n_grid, eps, trials, seed, family)?;
    let run = match statistic {
        "angle" => montecarlo::reject_angle,
        "inner" => montecarlo::reject_inner,
        "eq4" => montecarlo::verify_eq4,
        other => return Err(PyValueError::new_err(format!("unknown statistic '{other}'"))),
    };
    let c = py.detach(|| run(&p, &cfg)).map_err(err)?;
    curve_rows(py, &c)
}

#[pyfunction]
#[pyo3(signature = (x, n_grid, eps, trials, seed=0, family="gaussian"))]
fn norm_tail_curve<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    n_grid: Vec<usize>,
    eps: f64,
    trials: usize,
    seed: u64,
    family: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let x = vector(x)?;
    let cfg = config(n_grid, eps, trials, seed, family)?;
    let c = py.detach(|| montecarlo::verify_norm_tail(&x, &cfg)).map_err(err)?;
    curve_rows(py, &c)
}

/// Margin rejection curve for a dataset and its witness vectors (one vector
/// for binary data, one per class otherwise).
#[pyfunction]
#[pyo3(signature = (data, witnesses, n_grid, eps, trials, normalised=true, seed=0, family="gaussian"))]
#[allow(clippy::too_many_arguments)]
fn margin_curve<'py>(
    py: Python<'py>,
    data: &PyDataset,
    witnesses: Vec<Vec<f64>>,
    n_grid: Vec<usize>,
    eps: f64,
    trials: usize,
    normalised: bool,
    seed: u64,
    family: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut ws = witnesses.into_iter().map(vector).collect::<PyResult<Vec<_>>>()?;
    let witness = if ws.len() == 1 {
        LinearWitness::binary(ws.remove(0))
    } else {
        LinearWitness::multiclass(ws)
    }
    .map_err(err)?;
    let cfg = config(n_grid, eps, trials, seed, family)?;
    let c = py
        .detach(|| montecarlo::reject_margin(&data.0, &witness, &cfg, kind(normalised), MarginMode::ProjectedWitness))
        .map_err(err)?;
    curve_rows(py, &c)
}

/// `(mean, standard_error)` of the projected inner product.
#[pyfunction]
#[pyo3(signature = (w, x, n, trials, seed=0, family="gaussian"))]
fn mean_inner_product(
    py: Python<'_>,
    w: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    trials: usize,
    seed: u64,
    family: &str,
) -> PyResult<(f64, f64)> {
    let p = pair(w, x)?;
    let fam = self::family(family)?;
    py.detach(|| montecarlo::verify_mean(&p, n, trials, seed, fam))
        .map_err(err)
}

/// CSV for one of fig2a, fig2b, fig2c, fig2d, fig3, counterexample.
#[pyfunction]
#[pyo3(signature = (figure, seed=0, trials=None))]
fn reproduce(py: Python<'_>, figure: &str, seed: u64, trials: Option<usize>) -> PyResult<String> {
    let fig: repro::Figure = figure.parse().map_err(err)?;
    let settings = repro::ReproSettings {
        seed,
        trials,
        family: Family::Gaussian,
    };
    py.detach(|| repro::reproduce(fig, &settings)).map_err(err)
}

#[pymodule]
fn rpmargin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProjectionMatrix>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(binary_margin, m)?)?;
    m.add_function(wrap_pyfunction!(multiclass_margin, m)?)?;
    m.add_function(wrap_pyfunction!(one_param_margin, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_binary_margin, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_margin_2d, m)?)?;
    m.add_function(wrap_pyfunction!(tail_success_prob, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_tails, m)?)?;
    m.add_function(wrap_pyfunction!(angle_distortion_interval, m)?)?;
    m.add_function(wrap_pyfunction!(min_dim_binary, m)?)?;
    m.add_function(wrap_pyfunction!(min_dim_multiclass, m)?)?;
    m.add_function(wrap_pyfunction!(min_dim_oneparam, m)?)?;
    m.add_function(wrap_pyfunction!(projected_margin_binary, m)?)?;
    m.add_function(wrap_pyfunction!(projected_margin_multiclass, m)?)?;
    m.add_function(wrap_pyfunction!(projected_margin_oneparam, m)?)?;
    m.add_function(wrap_pyfunction!(balcan_min_dim, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample_square, m)?)?;
    m.add_function(wrap_pyfunction!(separability_probability_1d, m)?)?;
    m.add_function(wrap_pyfunction!(random_pair_with_cosine, m)?)?;
    m.add_function(wrap_pyfunction!(parallel_hyperplanes, m)?)?;
    m.add_function(wrap_pyfunction!(pair_curve, m)?)?;
    m.add_function(wrap_pyfunction!(norm_tail_curve, m)?)?;
    m.add_function(wrap_pyfunction!(margin_curve, m)?)?;
    m.add_function(wrap_pyfunction!(mean_inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
