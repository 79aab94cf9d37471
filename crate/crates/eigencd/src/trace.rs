/// One convergence-trace row. `passes` counts coordinate-update cost units
/// divided by the dimension, so a full matvec costs one pass and the axis is
/// comparable across coordinate-wise and full-vector methods.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub method: String,
    pub passes: f64,
    pub seconds: f64,
    pub rayleigh: f64,
    /// `rho_1 - rayleigh` when a reference eigenvalue is known.
    pub suboptimality: Option<f64>,
}
