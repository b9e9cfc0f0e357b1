//! The level schedule `N_m` and small helpers over position blocks.

/// `N_m` read off the triangular word `1; 1,2; 1,2,3; ...`.
///
/// `N_m <= m` and every value recurs infinitely often.
pub fn nn_schedule(m: usize) -> u32 {
    assert!(m >= 1, "schedule starts at 1");
    // largest b with b(b-1)/2 < m
    let mut b = 1usize;
    while b * (b + 1) / 2 < m {
        b += 1;
    }
    (m - b * (b - 1) / 2) as u32
}

/// Stages `n` in `[from, to]` with `N_n = level`.
pub fn stages_with_level(level: u32, from: usize, to: usize) -> Vec<usize> {
    (from.max(1)..=to).filter(|m| nn_schedule(*m) == level).collect()
}
