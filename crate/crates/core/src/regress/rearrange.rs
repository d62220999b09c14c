/// Monotone rearrangement of a curve sampled on a grid: its values sorted in
/// nondecreasing order.
pub fn rearrange(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}
