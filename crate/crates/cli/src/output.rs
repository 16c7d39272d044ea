/// A number for plain-text output: rounded to 12 significant digits, then
/// printed in shortest round-trip form (`0.006`, `1.0`, `2.5e-9`).
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x:?}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}
