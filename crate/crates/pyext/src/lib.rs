//! Python bindings. The classes wrap their Rust counterparts by value;
//! all operations return new objects, mirroring the Rust API's
//! immutable style.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use abptk::hardpoly::{self, BlockStructure, LambdaAssignment, WAssignment};
use abptk::models;
use abptk::partitions;
use abptk::pit::{roabp_pit, strict_interval_pit, PitResult};
use abptk::rank;
use abptk::transforms;
use abptk::MultilinearPoly;

fn err(e: abptk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A multilinear polynomial over Z_p in sparse term form.
#[pyclass(frozen)]
struct Poly {
    inner: MultilinearPoly,
}

#[pymethods]
impl Poly {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Poly { inner: MultilinearPoly::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn coeff(&self, mask: u32) -> u64 {
        self.inner.coeff(mask)
    }

    fn terms(&self) -> Vec<(u32, u64)> {
        self.inner.terms().collect()
    }

    fn eval(&self, point: Vec<u64>) -> PyResult<u64> {
        self.inner.eval(&point).map_err(err)
    }

    fn add(&self, other: &Poly) -> PyResult<Poly> {
        Ok(Poly { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn mul(&self, other: &Poly) -> PyResult<Poly> {
        Ok(Poly { inner: self.inner.mul(&other.inner).map_err(err)? })
    }

    fn __eq__(&self, other: &Poly) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Poly({} terms over {} vars mod {})",
            self.inner.num_terms(),
            self.inner.num_vars(),
            self.inner.modulus()
        )
    }
}

/// A Y/Z split of the variable set.
#[pyclass(frozen)]
struct Partition {
    inner: partitions::Partition,
}

#[pymethods]
impl Partition {
    #[new]
    fn new(n: usize, y_indices: Vec<usize>) -> PyResult<Self> {
        Ok(Partition { inner: partitions::Partition::new(n, y_indices).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Partition { inner: partitions::Partition::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn y_mask(&self) -> u32 {
        self.inner.y_mask()
    }

    fn is_equi(&self) -> bool {
        self.inner.is_equi()
    }

    fn __repr__(&self) -> String {
        format!("Partition(y_mask={:#b})", self.inner.y_mask())
    }
}

/// An arithmetic formula with n-ary sum and product gates.
#[pyclass(frozen)]
struct Formula {
    inner: models::Formula,
}

#[pymethods]
impl Formula {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Formula { inner: models::Formula::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn size(&self) -> usize {
        self.inner.size()
    }

    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn max_read(&self) -> usize {
        self.inner.max_read()
    }

    fn is_read_once(&self) -> bool {
        self.inner.check_rof().verdict
    }

    fn is_interval(&self) -> bool {
        self.inner.check_interval_formula().verdict
    }

    fn eval(&self, point: Vec<u64>) -> PyResult<u64> {
        self.inner.eval(&point).map_err(err)
    }

    fn expand(&self) -> PyResult<Poly> {
        Ok(Poly { inner: self.inner.expand().map_err(err)? })
    }

    /// Rebalance an interval formula to logarithmic depth.
    fn depth_reduce(&self) -> PyResult<Formula> {
        Ok(Formula { inner: transforms::depth_reduce_interval(&self.inner).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "Formula(size={}, depth={}, vars={})",
            self.inner.size(),
            self.inner.depth(),
            self.inner.num_vars()
        )
    }
}

/// A layered algebraic branching program.
#[pyclass(frozen)]
struct Abp {
    inner: models::Abp,
}

#[pymethods]
impl Abp {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Abp { inner: models::Abp::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    fn num_layers(&self) -> usize {
        self.inner.layers().len()
    }

    /// The read order if the program is an oblivious ROABP, else None.
    fn roabp_order(&self) -> Option<Vec<usize>> {
        self.inner.check_oblivious_roabp().order
    }

    fn is_strict_interval(&self) -> bool {
        self.inner.check_strict_interval().report.verdict
    }

    fn eval(&self, point: Vec<u64>) -> PyResult<u64> {
        self.inner.eval(&point).map_err(err)
    }

    fn expand(&self) -> PyResult<Poly> {
        Ok(Poly { inner: self.inner.expand().map_err(err)? })
    }

    /// Convert a strict-interval program into an equivalent ROABP.
    fn to_roabp(&self) -> PyResult<Abp> {
        Ok(Abp { inner: transforms::strict_interval_to_roabp(&self.inner).map_err(err)? })
    }

    /// White-box zero test. Returns None when the program computes the
    /// zero polynomial, else (witness_mask, witness_point).
    fn pit(&self) -> PyResult<Option<(u64, Vec<u64>)>> {
        let res = if self.inner.check_oblivious_roabp().report.verdict {
            roabp_pit(&self.inner).map_err(err)?
        } else {
            strict_interval_pit(&self.inner).map_err(err)?
        };
        Ok(match res {
            PitResult::Zero => None,
            PitResult::NonZero { witness_mask, witness_point } => {
                Some((witness_mask, witness_point))
            }
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Abp({} nodes, {} layers, vars={})",
            self.inner.num_nodes(),
            self.inner.layers().len(),
            self.inner.num_vars()
        )
    }
}

#[pyfunction]
fn gen_ry(n: usize, seed: u64, prime: u64) -> PyResult<Poly> {
    let vars: Vec<usize> = (0..n).collect();
    let w = WAssignment::seeded(prime, seed).map_err(err)?;
    Ok(Poly { inner: hardpoly::gen_ry(&vars, n, &w).map_err(err)? })
}

#[pyfunction]
fn gen_pry(n: usize, r: usize, seed: u64, prime: u64) -> PyResult<Poly> {
    let bs = BlockStructure::new(n, r).map_err(err)?;
    let w = WAssignment::seeded(prime, seed).map_err(err)?;
    Ok(Poly { inner: hardpoly::gen_pry(&bs, &w).map_err(err)? })
}

#[pyfunction]
fn gen_dmpy(n: usize, seed: u64, prime: u64) -> PyResult<Poly> {
    let lambda = LambdaAssignment::seeded(prime, seed).map_err(err)?;
    Ok(Poly { inner: hardpoly::gen_dmpy(n, &lambda).map_err(err)? })
}

#[pyfunction]
fn gen_dmpy_smabp(n: usize, seed: u64, prime: u64) -> PyResult<Abp> {
    let tags = LambdaAssignment::seeded(prime, seed).map_err(err)?;
    Ok(Abp { inner: hardpoly::gen_dmpy_smabp(n, &tags).map_err(err)? })
}

#[pyfunction]
fn random_rof(n: usize, seed: u64, prime: u64) -> PyResult<Formula> {
    Ok(Formula { inner: hardpoly::random_rof(n, seed, prime).map_err(err)? })
}

#[pyfunction]
fn random_interval_formula(n: usize, size: usize, seed: u64, prime: u64) -> PyResult<Formula> {
    Ok(Formula { inner: hardpoly::random_interval_formula(n, size, seed, prime).map_err(err)? })
}

#[pyfunction]
fn random_roabp(n: usize, width: usize, seed: u64, prime: u64) -> PyResult<Abp> {
    Ok(Abp { inner: hardpoly::random_roabp(n, width, seed, prime).map_err(err)? })
}

#[pyfunction]
fn random_strict_interval_abp(n: usize, size: usize, seed: u64, prime: u64) -> PyResult<Abp> {
    Ok(Abp { inner: hardpoly::random_strict_interval_abp(n, size, seed, prime).map_err(err)? })
}

#[pyfunction]
fn sample_equipartition(n: usize, seed: u64) -> PyResult<Partition> {
    Ok(Partition { inner: partitions::sample_equipartition(n, seed).map_err(err)? })
}

#[pyfunction]
fn sample_db(n: usize, r: usize, seed: u64) -> PyResult<Partition> {
    let bs = BlockStructure::new(n, r).map_err(err)?;
    Ok(Partition { inner: partitions::sample_db(&bs, seed).map_err(err)? })
}

/// Rank of the polynomial's coefficient matrix under the partition.
#[pyfunction]
fn pd_rank(poly: &Poly, partition: &Partition) -> PyResult<usize> {
    rank::pd_rank(&poly.inner, &partition.inner).map_err(err)
}

/// Run a named experiment; returns (report_json, all_invariants_held).
#[pyfunction]
fn run_experiment(name: &str, params_json: &str, prime: u64, seed: u64) -> PyResult<(String, bool)> {
    let params: serde_json::Map<String, serde_json::Value> = serde_json::from_str(params_json)
        .map_err(|e| PyValueError::new_err(format!("params must be a JSON object: {e}")))?;
    let (report, ok) = abptk_cli::run_experiment(name, &params, prime, seed, None).map_err(err)?;
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((text, ok))
}

#[pymodule]
fn abptk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_PRIME", abptk::field::DEFAULT_PRIME)?;
    m.add_class::<Poly>()?;
    m.add_class::<Partition>()?;
    m.add_class::<Formula>()?;
    m.add_class::<Abp>()?;
    m.add_function(wrap_pyfunction!(gen_ry, m)?)?;
    m.add_function(wrap_pyfunction!(gen_pry, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dmpy, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dmpy_smabp, m)?)?;
    m.add_function(wrap_pyfunction!(random_rof, m)?)?;
    m.add_function(wrap_pyfunction!(random_interval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(random_roabp, m)?)?;
    m.add_function(wrap_pyfunction!(random_strict_interval_abp, m)?)?;
    m.add_function(wrap_pyfunction!(sample_equipartition, m)?)?;
    m.add_function(wrap_pyfunction!(sample_db, m)?)?;
    m.add_function(wrap_pyfunction!(pd_rank, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
