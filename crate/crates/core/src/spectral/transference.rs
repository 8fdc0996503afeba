use super::table::EigenTable;

/// F(ξ_n, ξ_m) = ⟨(1+r²)⁻² ψ_ξn, ψ_ξm⟩ in the continuum normalization.
pub fn transference_modes(table: &EigenTable, n: usize, m: usize) -> f64 {
    let grid = table.field_grid();
    let (a, b) = (table.psi_unit(n), table.psi_unit(m));
    let s: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(a.iter().zip(b))
        .map(|((&r, w), (x, y))| w * x * y / (1.0 + r * r).powi(2))
        .sum();
    s / (table.dxi()[n] * table.dxi()[m]).sqrt()
}

/// F(ξ, η) at the tabulated frequencies nearest to ξ and η.
pub fn transference_f(table: &EigenTable, xi: f64, eta: f64) -> f64 {
    transference_modes(table, table.nearest_mode(xi), table.nearest_mode(eta))
}
