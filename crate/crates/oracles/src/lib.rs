//! Slow, obviously-correct reference computations for tests.
//!
//! Nothing here shares code with the library under test.

/// Minimum edit cost over every monotone matching between `a` and `b`:
/// matched pairs cost 0 when equal and 1 otherwise, unmatched items cost 1.
pub fn brute_force_alignment_cost(a: &[u8], b: &[u8]) -> u32 {
    assert!(a.len() <= 16 && b.len() <= 16, "exhaustive search only for short inputs");
    let by_size = |n: usize| {
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        for mask in 0u32..(1 << n) {
            groups[mask.count_ones() as usize].push(mask);
        }
        groups
    };
    let (ga, gb) = (by_size(a.len()), by_size(b.len()));
    let mut best = u32::MAX;
    for k in 0..=a.len().min(b.len()) {
        for &ma in &ga[k] {
            let ia: Vec<usize> = (0..a.len()).filter(|i| ma & (1 << i) != 0).collect();
            for &mb in &gb[k] {
                let ib = (0..b.len()).filter(|j| mb & (1 << j) != 0);
                let subs = ia.iter().zip(ib).filter(|(&i, j)| a[i] != b[*j]).count() as u32;
                let cost = subs + (a.len() - k) as u32 + (b.len() - k) as u32;
                best = best.min(cost);
            }
        }
    }
    best
}

/// Minimum total cost of assigning each row to a distinct column, by
/// enumerating every injective map.
pub fn brute_force_assignment_cost(cost: &[Vec<f64>]) -> f64 {
    fn go(row: usize, cost: &[Vec<f64>], used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                go(row + 1, cost, used, acc + cost[row][c], best);
                used[c] = false;
            }
        }
    }
    let cols = cost.first().map_or(0, Vec::len);
    let mut best = f64::INFINITY;
    go(0, cost, &mut vec![false; cols], 0.0, &mut best);
    if cost.is_empty() {
        0.0
    } else {
        best
    }
}

/// Linear blend of two `#rrggbb` colours, each channel rounded to nearest.
pub fn lerp_hex(from: &str, to: &str, t: f64) -> String {
    let channels = |s: &str| -> [f64; 3] {
        let s = s.trim_start_matches('#');
        [0, 2, 4].map(|i| u8::from_str_radix(&s[i..i + 2], 16).expect("hex colour") as f64)
    };
    let (a, b) = (channels(from), channels(to));
    let mixed: Vec<String> = (0..3).map(|i| format!("{:02x}", (a[i] + (b[i] - a[i]) * t).round() as u8)).collect();
    format!("#{}", mixed.concat())
}

/// Largest `|d(i, j) - ‖p_i - p_j‖|` over all pairs.
pub fn max_distance_error(d: impl Fn(usize, usize) -> f64, points: &[[f64; 2]]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..points.len() {
        for j in 0..points.len() {
            let e = ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt();
            worst = worst.max((d(i, j) - e).abs());
        }
    }
    worst
}
