//! Quality-factor inference against the IJG scaling of the standard
//! luminance table (ITU-T T.81 Annex K, Table K.1).

use super::QuantTable;

/// Annex K luminance table, natural order.
pub const STANDARD_LUMINANCE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Largest summed absolute step difference still accepted as a match
/// (an average of one step per mode).
const MATCH_TOLERANCE: u32 = 64;

/// The IJG quality-scaled luminance table for `quality` in 1..=100, clamped
/// to baseline 8-bit steps.
pub fn standard_table(quality: u8) -> QuantTable {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut steps = [0u16; 64];
    for (s, &base) in steps.iter_mut().zip(STANDARD_LUMINANCE.iter()) {
        *s = ((base as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    QuantTable(steps)
}

/// Nearest standard quality for a table, or `None` when nothing is close.
pub fn infer_quality(table: &QuantTable) -> Option<u8> {
    let mut best: Option<(u32, u8)> = None;
    for quality in 1..=100u8 {
        let reference = standard_table(quality);
        let distance: u32 = table
            .steps()
            .iter()
            .zip(reference.steps())
            .map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs())
            .sum();
        if best.is_none_or(|(d, _)| distance < d) {
            best = Some((distance, quality));
        }
    }
    best.filter(|&(d, _)| d <= MATCH_TOLERANCE).map(|(_, q)| q)
}
