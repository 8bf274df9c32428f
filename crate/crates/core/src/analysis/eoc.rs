/// Experimental order of convergence `ln(e_c / e_f) / ln(h_c / h_f)`.
///
/// `None` when an error is not positive or the mesh sizes do not decrease.
pub fn eoc(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> Option<f64> {
    eoc_log_corrected(e_coarse, e_fine, h_coarse, h_fine, 0)
}

/// EOC after dividing each error by `|ln h|^log_power`. For errors behaving
/// like `h^p |ln h|^k` with `k = log_power` this recovers `p`.
pub fn eoc_log_corrected(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64, log_power: i32) -> Option<f64> {
    let valid = e_coarse > 0.0
        && e_fine > 0.0
        && h_fine > 0.0
        && h_fine < h_coarse
        && e_coarse.is_finite()
        && e_fine.is_finite();
    if !valid {
        return None;
    }
    if log_power == 0 {
        return Some((e_coarse / e_fine).ln() / (h_coarse / h_fine).ln());
    }
    if h_coarse >= 1.0 {
        return None;
    }
    let c = e_coarse / h_coarse.ln().abs().powi(log_power);
    let f = e_fine / h_fine.ln().abs().powi(log_power);
    Some((c / f).ln() / (h_coarse / h_fine).ln())
}
