//! Python bindings for the partition-combinatorics library.
//!
//! Rationals cross the boundary as `fractions.Fraction`; weight arguments
//! accept a family name (`uniform`, `cycles`, `segments`/`lah`,
//! `trees`/`cayley`) or any iterable of ints, Fractions, or `p/q` strings.
//! Random functions take an explicit seed and are reproducible.

// The pyfunction macros expand to an .into() on errors that are already
// PyErr, which trips this lint from outside our code.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use bellfrag::bigdec::parse_rat;
use bellfrag::partition::SetPartition;
use bellfrag::weights::WeightSequence;
use bellfrag::{existence, frag, gibbs, gw, kingman, stats, weights, Rat};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat_to_py(py: Python<'_>, r: &Rat) -> PyResult<PyObject> {
    let class = py.import_bound("fractions")?.getattr("Fraction")?;
    Ok(class.call1((r.numer().clone(), r.denom().clone()))?.unbind())
}

fn rat_from_py(obj: &Bound<'_, PyAny>) -> PyResult<Rat> {
    if let Ok(i) = obj.extract::<num_bigint::BigInt>() {
        return Ok(Rat::from_integer(i));
    }
    let s = obj.str()?.to_string();
    parse_rat(&s).ok_or_else(|| {
        PyValueError::new_err(format!(
            "cannot read {s:?} as a rational; pass an int, Fraction, or a p/q string"
        ))
    })
}

/// Resolves a family name or an iterable of rationals to `n` weights.
fn weights_from_py(obj: &Bound<'_, PyAny>, n: u32) -> PyResult<WeightSequence> {
    if let Ok(name) = obj.extract::<String>() {
        return match name.as_str() {
            "uniform" => Ok(WeightSequence::uniform(n)),
            "cycles" => Ok(WeightSequence::cycles(n)),
            "segments" | "lah" => Ok(WeightSequence::segments(n)),
            "trees" | "cayley" => Ok(WeightSequence::trees(n)),
            other => Err(PyValueError::new_err(format!(
                "unknown weight family {other:?}; expected uniform, cycles, \
                 segments (lah), trees (cayley), or a list of rationals"
            ))),
        };
    }
    let mut values = Vec::new();
    for item in obj.iter()? {
        values.push(rat_from_py(&item?)?);
    }
    let w = WeightSequence::from_values(values).map_err(value_err)?;
    if w.n_max() < n {
        return Err(PyValueError::new_err(format!(
            "{} weights given but n={n} needs that many",
            w.n_max()
        )));
    }
    Ok(w)
}

/// A partition of `{1, ..., n}` into disjoint blocks.
#[pyclass(name = "SetPartition", module = "bellfrag_py", frozen, eq, ord, hash)]
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PySetPartition {
    inner: SetPartition,
}

#[pymethods]
impl PySetPartition {
    #[new]
    fn new(n: u32, blocks: Vec<Vec<u32>>) -> PyResult<Self> {
        let inner = SetPartition::from_blocks(n, &blocks).map_err(value_err)?;
        Ok(PySetPartition { inner })
    }

    /// The one-block partition of `{1, ..., n}`.
    #[staticmethod]
    fn whole(n: u32) -> Self {
        PySetPartition {
            inner: SetPartition::whole(n),
        }
    }

    /// The all-singletons partition of `{1, ..., n}`.
    #[staticmethod]
    fn singletons(n: u32) -> Self {
        PySetPartition {
            inner: SetPartition::singletons(n),
        }
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    /// Number of blocks.
    #[getter]
    fn k(&self) -> u32 {
        self.inner.k()
    }

    fn blocks(&self) -> Vec<Vec<u32>> {
        self.inner.blocks()
    }

    fn block_sizes(&self) -> Vec<u32> {
        self.inner.block_sizes()
    }

    /// Block sizes in decreasing order.
    fn shape(&self) -> Vec<u32> {
        self.inner.shape().parts().to_vec()
    }

    /// True when every block of `self` sits inside a block of `other`.
    fn refines(&self, other: &PySetPartition) -> bool {
        self.inner.refines(&other.inner)
    }

    /// The partition with blocks `i` and `j` (0-based) joined.
    fn merge(&self, i: u32, j: u32) -> PyResult<Self> {
        let k = self.inner.k();
        if i >= k || j >= k || i == j {
            return Err(PyIndexError::new_err(format!(
                "need two distinct block indices below {k}"
            )));
        }
        Ok(PySetPartition {
            inner: self.inner.merge_blocks(i, j),
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SetPartition('{}')", self.inner)
    }
}

fn wrap(inner: SetPartition) -> PySetPartition {
    PySetPartition { inner }
}

/// Partial Bell polynomial in the given weights: the total weight of
/// partitions of an n-set into k blocks, each block of size j counting
/// its weight w_j as a factor.
#[pyfunction]
fn bell(py: Python<'_>, n: u32, k: u32, weights: &Bound<'_, PyAny>) -> PyResult<PyObject> {
    let w = weights_from_py(weights, n)?;
    let table = weights::BellTable::build(&w, n);
    if k == 0 || k > n {
        return Err(PyValueError::new_err(format!("need 1 <= k <= {n}")));
    }
    rat_to_py(py, table.bell(n, k))
}

/// The product-form weights w_j = prod_{i=2..j} (i*c + j*b), as Fractions.
#[pyfunction]
fn bc_weights(
    py: Python<'_>,
    b: &Bound<'_, PyAny>,
    c: &Bound<'_, PyAny>,
    n: u32,
) -> PyResult<Vec<PyObject>> {
    let b = rat_from_py(b)?;
    let c = rat_from_py(c)?;
    let w = weights::weights_bc(n, &b, &c);
    (1..=n).map(|j| rat_to_py(py, w.w(j))).collect()
}

/// Whether the product-form weights stay positive through size n.
#[pyfunction]
fn bc_valid(n: u32, b: &Bound<'_, PyAny>, c: &Bound<'_, PyAny>) -> PyResult<bool> {
    Ok(weights::bc_valid(n, &rat_from_py(b)?, &rat_from_py(c)?))
}

/// The exact partition law with k blocks: pairs of (partition, Fraction).
#[pyfunction]
fn gibbs_law(
    py: Python<'_>,
    n: u32,
    k: u32,
    weights: &Bound<'_, PyAny>,
) -> PyResult<Vec<(PySetPartition, PyObject)>> {
    let w = weights_from_py(weights, n)?;
    let spec = gibbs::GibbsSpec::micro(n, k, &w).map_err(value_err)?;
    let law = gibbs::tabulate_set_law(&spec).map_err(value_err)?;
    law.iter()
        .map(|(pi, p)| Ok((wrap(pi.clone()), rat_to_py(py, p)?)))
        .collect()
}

/// Seeded draws from the k-block partition law.
#[pyfunction]
#[pyo3(signature = (n, k, weights, samples, seed = 0))]
fn gibbs_sample(
    n: u32,
    k: u32,
    weights: &Bound<'_, PyAny>,
    samples: u64,
    seed: u64,
) -> PyResult<Vec<PySetPartition>> {
    let w = weights_from_py(weights, n)?;
    let spec = gibbs::GibbsSpec::micro(n, k, &w).map_err(value_err)?;
    let mut rng = stats::rng_stream(seed, 0);
    Ok((0..samples).map(|_| wrap(spec.sample(&mut rng))).collect())
}

/// One seeded run of the splitting chain, from one block down to
/// singletons; returns the n partitions along the way.
#[pyfunction]
#[pyo3(signature = (n, weights, seed = 0))]
fn fragmentation_path(
    n: u32,
    weights: &Bound<'_, PyAny>,
    seed: u64,
) -> PyResult<Vec<PySetPartition>> {
    let w = weights_from_py(weights, n)?;
    let mut rng = stats::rng_stream(seed, 0);
    let path = frag::run_fragmentation(n, &w, &mut rng).map_err(value_err)?;
    Ok(path.states().iter().cloned().map(wrap).collect())
}

/// One seeded run of the continuous-time coalescent with merge rates
/// 2c + b(i+j); returns (time, partition) events from singletons up.
#[pyfunction]
#[pyo3(signature = (n, b, c, seed = 0))]
fn coalescent_path(
    n: u32,
    b: &Bound<'_, PyAny>,
    c: &Bound<'_, PyAny>,
    seed: u64,
) -> PyResult<Vec<(f64, PySetPartition)>> {
    let kernel = frag::AffineKernel::from_bc(&rat_from_py(b)?, &rat_from_py(c)?);
    if !kernel.positive_up_to(n) {
        return Err(PyValueError::new_err(
            "kernel 2c+b(i+j) must be positive for all reachable block sizes",
        ));
    }
    let mut rng = stats::rng_stream(seed, 0);
    let run = frag::ml_continuous(n, &kernel, &mut rng).map_err(value_err)?;
    Ok(run
        .events()
        .iter()
        .map(|(t, pi)| (*t, wrap(pi.clone())))
        .collect())
}

/// Whether the k-block laws for these weights can be coupled into a
/// refining chain at size n.
#[pyfunction]
fn exists_coupling(n: u32, weights: &Bound<'_, PyAny>) -> PyResult<bool> {
    let w = weights_from_py(weights, n.max(2) - 1)?;
    Ok(existence::exists_gibbs_frag(n, &w)
        .map_err(value_err)?
        .feasible)
}

/// The smallest size up to n_max where no refining coupling exists, or
/// None when all sizes pass.
#[pyfunction]
fn first_failing_size(weights: &Bound<'_, PyAny>, n_max: u32) -> PyResult<Option<u32>> {
    let w = weights_from_py(weights, n_max.max(2) - 1)?;
    Ok(existence::first_failing_n(&w, n_max)
        .map_err(value_err)?
        .map(|r| r.n))
}

/// Number of plane forests with k trees on n vertices.
#[pyfunction]
fn plane_forest_count(py: Python<'_>, n: u32, k: u32) -> PyResult<PyObject> {
    Ok(gw::plane_forest_count(n, k).into_py(py))
}

/// P(total progeny of k independent trees = m) for the (b, c) offspring
/// family, as a float.
#[pyfunction]
fn total_progeny_prob(
    k: u32,
    m: u32,
    b: &Bound<'_, PyAny>,
    c: &Bound<'_, PyAny>,
) -> PyResult<f64> {
    let off = gw::OffspringDist::bc(&rat_from_py(b)?, &rat_from_py(c)?, m).map_err(value_err)?;
    let sp = gw::total_progeny_pmf(k, m, &off).map_err(value_err)?;
    Ok(sp.approx(off.p0_approx()))
}

/// The law of the size of a fair-coin block of the first split of the
/// n-leaf coalescent tree, as floats indexed by size 1..n-1.
#[pyfunction]
fn first_split_law(n: u32) -> PyResult<Vec<f64>> {
    if n < 2 {
        return Err(PyValueError::new_err("need n >= 2"));
    }
    Ok(kingman::first_split_j_exact(n)
        .iter()
        .map(|combo| combo.eval_f64())
        .collect())
}

/// The same law in exact closed form, one expression string per size.
#[pyfunction]
fn first_split_forms(n: u32) -> PyResult<Vec<String>> {
    if n < 2 {
        return Err(PyValueError::new_err("need n >= 2"));
    }
    Ok(kingman::first_split_j_exact(n)
        .iter()
        .map(|combo| combo.to_string())
        .collect())
}

/// The exact allelic partition law at mutation level theta: pairs of
/// (partition, Fraction).
#[pyfunction]
fn ewens_law(
    py: Python<'_>,
    n: u32,
    theta: &Bound<'_, PyAny>,
) -> PyResult<Vec<(PySetPartition, PyObject)>> {
    let spec = kingman::EwensSpec::new(n, rat_from_py(theta)?).map_err(value_err)?;
    let law = spec.law().map_err(value_err)?;
    law.iter()
        .map(|(pi, p)| Ok((wrap(pi.clone()), rat_to_py(py, p)?)))
        .collect()
}

/// E[exp(-s L_n)] for the total branch length of the n-leaf coalescent
/// tree, exact in s.
#[pyfunction]
fn total_length_laplace(py: Python<'_>, n: u32, s: &Bound<'_, PyAny>) -> PyResult<PyObject> {
    let v = kingman::total_length_laplace(n, &rat_from_py(s)?);
    rat_to_py(py, &v)
}

/// Runs one of the release-gate suites by name; returns (passed, details).
#[pyfunction]
fn run_suite(name: &str) -> PyResult<(bool, Vec<String>)> {
    match bellfrag::acceptance::run_named(name) {
        Some(report) => Ok((report.passed, report.details)),
        None => Err(PyValueError::new_err(format!(
            "unknown suite {name:?}; known suites: {}",
            bellfrag::acceptance::criterion_names().join(", ")
        ))),
    }
}

#[pymodule]
fn bellfrag_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySetPartition>()?;
    m.add_function(wrap_pyfunction!(bell, m)?)?;
    m.add_function(wrap_pyfunction!(bc_weights, m)?)?;
    m.add_function(wrap_pyfunction!(bc_valid, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs_law, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs_sample, m)?)?;
    m.add_function(wrap_pyfunction!(fragmentation_path, m)?)?;
    m.add_function(wrap_pyfunction!(coalescent_path, m)?)?;
    m.add_function(wrap_pyfunction!(exists_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(first_failing_size, m)?)?;
    m.add_function(wrap_pyfunction!(plane_forest_count, m)?)?;
    m.add_function(wrap_pyfunction!(total_progeny_prob, m)?)?;
    m.add_function(wrap_pyfunction!(first_split_law, m)?)?;
    m.add_function(wrap_pyfunction!(first_split_forms, m)?)?;
    m.add_function(wrap_pyfunction!(ewens_law, m)?)?;
    m.add_function(wrap_pyfunction!(total_length_laplace, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
