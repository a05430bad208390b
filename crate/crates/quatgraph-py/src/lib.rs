use pyo3::prelude::*;

#[pymodule]
fn quatgraph_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
