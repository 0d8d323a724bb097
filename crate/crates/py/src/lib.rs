//! Python bindings. Exact rationals cross the boundary as
//! `fractions.Fraction`; structured results come back as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use vorace::data::{bundled, Dataset as CoreDataset, Schema};
use vorace::ensemble::{evaluate as core_evaluate, EnsembleConfig};
use vorace::montecarlo::{simulate as core_simulate, SimConfig, VoterModel};
use vorace::theory::{self, BinaryTie, HeteroParams, KVariant, OracleInput, OverlapParams, Rational, TheoryParams};
use vorace::types::{Profile as CoreProfile, Ranking, ScoreVector};
use vorace::voting::{Rule, TiePolicy, DEFAULT_KEMENY_THRESHOLD};
use vorace::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::TooLarge(_) | Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn from_json<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    PyModule::import(py, "fractions")?
        .getattr("Fraction")?
        .call1((r.to_string(),))
}

/// Accepts ints, floats, strings (`"4/5"`, `"0.8"`) and Fractions.
fn rational(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = value.str()?.to_string();
    theory::parse_rational(&text).map_err(py_err)
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// A list of rankings over `m` classes, best first.
#[pyclass(module = "vorace_py")]
struct Profile {
    inner: CoreProfile,
}

#[pymethods]
impl Profile {
    #[new]
    #[pyo3(signature = (rankings, validation_accuracy=None, weights=None))]
    fn new(rankings: Vec<Vec<usize>>, validation_accuracy: Option<Vec<f64>>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let rankings = rankings
            .into_iter()
            .map(Ranking::new)
            .collect::<vorace::Result<Vec<_>>>()
            .map_err(py_err)?;
        let inner = CoreProfile::with_details(rankings, validation_accuracy, weights).map_err(py_err)?;
        Ok(Profile { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Profile {
            inner: CoreProfile::from_json(text).map_err(py_err)?,
        })
    }

    /// Profile of the rankings induced by classifier probability vectors.
    #[staticmethod]
    #[pyo3(signature = (scores, validation_accuracy=None))]
    fn from_scores(scores: Vec<Vec<f64>>, validation_accuracy: Option<Vec<f64>>) -> PyResult<Self> {
        let scores = scores
            .into_iter()
            .map(ScoreVector::new)
            .collect::<vorace::Result<Vec<_>>>()
            .map_err(py_err)?;
        Ok(Profile {
            inner: CoreProfile::from_scores(&scores, validation_accuracy).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn rankings(&self) -> Vec<Vec<usize>> {
        self.inner.rankings().iter().map(|r| r.order().to_vec()).collect()
    }

    /// Elects a winner; returns `{"winner", "rule_scores", "tied_set", ...}`.
    #[pyo3(signature = (rule, tie=None, kemeny_threshold=DEFAULT_KEMENY_THRESHOLD))]
    fn elect<'py>(&self, py: Python<'py>, rule: &str, tie: Option<&str>, kemeny_threshold: usize) -> PyResult<Bound<'py, PyAny>> {
        let tie = match tie {
            Some(t) => parse(t)?,
            None => TiePolicy::default_for(&self.inner),
        };
        let result = parse::<Rule>(rule)?
            .elect(&self.inner, tie, kemeny_threshold)
            .map_err(py_err)?;
        from_json(py, &result)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Profile(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Aggregates probability vectors with any rule, including `sum`.
#[pyfunction]
#[pyo3(signature = (scores, rule, accuracies=None, tie=None, kemeny_threshold=DEFAULT_KEMENY_THRESHOLD))]
fn aggregate_scores<'py>(
    py: Python<'py>,
    scores: Vec<Vec<f64>>,
    rule: &str,
    accuracies: Option<Vec<f64>>,
    tie: Option<&str>,
    kemeny_threshold: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let scores = scores
        .into_iter()
        .map(ScoreVector::new)
        .collect::<vorace::Result<Vec<_>>>()
        .map_err(py_err)?;
    let tie = match (tie, &accuracies) {
        (Some(t), _) => parse(t)?,
        (None, Some(_)) => TiePolicy::BestClassifier,
        (None, None) => TiePolicy::Lexicographic,
    };
    let result = parse::<Rule>(rule)?
        .elect_scores(&scores, accuracies.as_deref(), tie, kemeny_threshold)
        .map_err(py_err)?;
    from_json(py, &result)
}

fn params(n: usize, m: usize, p: &Bound<'_, PyAny>) -> PyResult<TheoryParams> {
    TheoryParams::new(n, m, rational(p)?).map_err(py_err)
}

/// Closed-form plurality accuracy with normalization `variant`.
#[pyfunction]
#[pyo3(signature = (n, m, p, variant="theorem"))]
fn t_p_paper<'py>(py: Python<'py>, n: usize, m: usize, p: &Bound<'py, PyAny>, variant: &str) -> PyResult<Bound<'py, PyAny>> {
    let variant: KVariant = parse(variant)?;
    fraction(py, &theory::t_p_paper(&params(n, m, p)?, variant).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (n, m, p, tie="strict-win"))]
fn t_p_oracle<'py>(py: Python<'py>, n: usize, m: usize, p: &Bound<'py, PyAny>, tie: &str) -> PyResult<Bound<'py, PyAny>> {
    let input = OracleInput::Homogeneous(params(n, m, p)?);
    fraction(py, &theory::t_p_oracle(&input, parse(tie)?).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (n, p, tie="strict"))]
fn t_p_binary<'py>(py: Python<'py>, n: usize, p: &Bound<'py, PyAny>, tie: &str) -> PyResult<Bound<'py, PyAny>> {
    let tie: BinaryTie = parse(tie)?;
    // validates p
    params(n, 2, p)?;
    fraction(py, &theory::t_p_binary(n, &rational(p)?, tie))
}

#[pyfunction]
fn t_hetero<'py>(py: Python<'py>, accuracies: Vec<Bound<'py, PyAny>>, m: usize) -> PyResult<Bound<'py, PyAny>> {
    let accuracies = accuracies.iter().map(rational).collect::<PyResult<Vec<_>>>()?;
    let params = HeteroParams::new(accuracies, m).map_err(py_err)?;
    fraction(py, &theory::t_hetero(&params).map_err(py_err)?)
}

#[pyfunction]
fn mu_pid<'py>(py: Python<'py>, n: usize, m: usize, p: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    params(n, m, p)?;
    fraction(py, &theory::mu_pid(n, m, &rational(p)?).map_err(py_err)?)
}

#[pyfunction]
fn overlap_bound<'py>(py: Python<'py>, n: usize, m: usize, p: &Bound<'py, PyAny>, rho: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let params = OverlapParams::new(n, m, rational(p)?, rational(rho)?).map_err(py_err)?;
    fraction(py, &theory::overlap_bound(&params).map_err(py_err)?)
}

/// Coefficient of `x^(n-i)` in the generating function for class count `m`.
#[pyfunction]
fn gen_fun_coeff<'py>(py: Python<'py>, m: usize, i: usize, n: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &theory::gen_fun_coeff(m, i, n))
}

/// Human-readable comparison of the closed-form variants with the oracle.
#[pyfunction]
fn audit(n: usize, m: usize, p: &Bound<'_, PyAny>) -> PyResult<String> {
    Ok(theory::audit(&params(n, m, p)?).to_string())
}

#[pyfunction]
#[pyo3(signature = (n, m, trials, seed, p=None, rho=0.0, accuracies=None, rule="plurality", tie="strict"))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    n: usize,
    m: usize,
    trials: u64,
    seed: u64,
    p: Option<f64>,
    rho: f64,
    accuracies: Option<Vec<f64>>,
    rule: &str,
    tie: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let model = match (accuracies, p) {
        (Some(accuracies), _) => VoterModel::Hetero { accuracies },
        (None, Some(p)) if rho > 0.0 => VoterModel::Overlap { p, rho },
        (None, Some(p)) => VoterModel::Iid { p },
        (None, None) => return Err(PyValueError::new_err("either p or accuracies is required")),
    };
    let config = SimConfig {
        n,
        m,
        trials,
        seed,
        model,
        rule: parse(rule)?,
        tie: parse(tie)?,
    };
    let result = py.detach(|| core_simulate(&config)).map_err(py_err)?;
    from_json(py, &result)
}

#[pyclass(module = "vorace_py")]
struct Dataset {
    inner: CoreDataset,
}

#[pymethods]
impl Dataset {
    /// One of `iris`, `wine`, `balance-scale`.
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        Ok(Dataset {
            inner: bundled(name).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn load_csv(path: &str, schema_path: &str) -> PyResult<Self> {
        let schema = Schema::from_path(schema_path).map_err(py_err)?;
        Ok(Dataset {
            inner: CoreDataset::load_csv(path, &schema).map_err(py_err)?,
        })
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names.clone()
    }

    #[getter]
    fn class_counts(&self) -> Vec<usize> {
        self.inner.class_counts()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Repeated stratified cross-validation of an `n`-member ensemble.
    #[pyo3(signature = (n=50, rule="plurality", folds=10, repeats=1, seed=42, tie=None))]
    #[allow(clippy::too_many_arguments)]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        n: usize,
        rule: &str,
        folds: usize,
        repeats: usize,
        seed: u64,
        tie: Option<&str>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let config = EnsembleConfig {
            tie: tie.map(parse).transpose()?,
            ..EnsembleConfig::new(n, parse(rule)?, seed)
        };
        let data = &self.inner;
        let report = py
            .detach(|| core_evaluate(data, &config, folds, repeats))
            .map_err(py_err)?;
        from_json(py, &report)
    }
}

#[pymodule]
fn vorace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Profile>()?;
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(aggregate_scores, m)?)?;
    m.add_function(wrap_pyfunction!(t_p_paper, m)?)?;
    m.add_function(wrap_pyfunction!(t_p_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(t_p_binary, m)?)?;
    m.add_function(wrap_pyfunction!(t_hetero, m)?)?;
    m.add_function(wrap_pyfunction!(mu_pid, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gen_fun_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
