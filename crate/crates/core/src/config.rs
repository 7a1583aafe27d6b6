/// Resource caps and tuning knobs shared by the engines.
#[derive(Debug, Clone)]
pub struct Config {
    /// Largest admissible group order.
    pub max_order: u64,
    /// Direct enumeration is used while `|S|·|T| < dispatch_c · order · log2(order)`.
    pub dispatch_c: f64,
    /// Largest `|A|` accepted by exhaustive Petridis selection.
    pub petridis_cap: usize,
    /// Maximal number of (A, B) pairs an exhaustive search may visit.
    pub search_budget: u128,
    /// Largest number of cells a grid (including fine alignment grids) may have.
    pub max_grid_cells: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_order: 1 << 32,
            dispatch_c: 1.0,
            petridis_cap: 20,
            search_budget: 1 << 26,
            max_grid_cells: 1 << 26,
        }
    }
}
