use crasp_kit::glitch::Scoring;

/// Best (score, fewest span groups) over every alignment, by plain recursion.
pub fn brute(src: &[&str], out: &[&str], s: &Scoring) -> (i64, usize) {
    fn go(src: &[&str], out: &[&str], s: &Scoring, prev: Option<bool>, score: i64, groups: usize, best: &mut (i64, usize)) {
        if src.is_empty() && out.is_empty() {
            if score > best.0 || (score == best.0 && groups < best.1) {
                *best = (score, groups);
            }
            return;
        }
        let mut step = |src: &[&str], out: &[&str], matched: bool, gain: i32| {
            let g = groups + usize::from(prev != Some(matched));
            go(src, out, s, Some(matched), score + i64::from(gain), g, best);
        };
        if let (Some((a, sr)), Some((b, or))) = (src.split_first(), out.split_first()) {
            step(sr, or, a == b, if a == b { s.matched } else { s.mismatch });
        }
        if let Some((_, sr)) = src.split_first() {
            step(sr, out, false, s.gap);
        }
        if let Some((_, or)) = out.split_first() {
            step(src, or, false, s.gap);
        }
    }
    let mut best = (i64::MIN, usize::MAX);
    go(src, out, s, None, 0, 0, &mut best);
    best
}

/// Every string of length 0..=4 over `letters`.
pub fn all_short<'a>(letters: &[&'a str]) -> Vec<Vec<&'a str>> {
    let mut words: Vec<Vec<&str>> = vec![vec![]];
    let mut frontier = words.clone();
    for _ in 0..4 {
        frontier = frontier
            .iter()
            .flat_map(|w| letters.iter().map(move |l| w.iter().copied().chain([*l]).collect::<Vec<_>>()))
            .collect();
        words.extend(frontier.iter().cloned());
    }
    words
}
