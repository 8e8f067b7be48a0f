//! Bit-parallel Levenshtein columns (Myers' algorithm, block-based variant).
//!
//! A [`Pattern`] is preprocessed once and then streamed over a text of
//! dense symbol ids. Two modes are supported:
//!
//! * prefix mode: the alignment is anchored at the first text symbol, so the
//!   score after `j` columns is `lev(pattern, text[..j])`;
//! * search mode: the alignment may start anywhere, so the score after `j`
//!   columns is `min_s lev(pattern, text[s..j])`.

const HIGH_BIT: u64 = 1 << 63;

#[derive(Debug, Clone)]
pub struct Pattern {
    len: usize,
    blocks: usize,
    last_mask: u64,
    peq: Vec<u64>,
}

impl Pattern {
    /// Symbols `>= alphabet_size` never match any text symbol.
    pub fn new(pattern: &[u32], alphabet_size: usize) -> Self {
        assert!(!pattern.is_empty(), "pattern must be non-empty");
        let len = pattern.len();
        let blocks = len.div_ceil(64);
        let mut peq = vec![0u64; alphabet_size * blocks];
        for (i, &sym) in pattern.iter().enumerate() {
            let sym = sym as usize;
            if sym < alphabet_size {
                peq[sym * blocks + i / 64] |= 1u64 << (i % 64);
            }
        }
        let last_mask = 1u64 << ((len - 1) % 64);
        Self { len, blocks, last_mask, peq }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Calls `visit(j, lev(pattern, text[..j]))` for `j = 1..=text.len()`.
    /// Stops early when `visit` returns `false`.
    pub fn prefix_scores(&self, text: &[u32], visit: impl FnMut(usize, usize) -> bool) {
        self.run(text, 1, visit)
    }

    /// Calls `visit(j, min_s lev(pattern, text[s..j]))` for `j = 1..=text.len()`.
    pub fn search_scores(&self, text: &[u32], visit: impl FnMut(usize, usize) -> bool) {
        self.run(text, 0, visit)
    }

    fn run(&self, text: &[u32], top_hin: i32, mut visit: impl FnMut(usize, usize) -> bool) {
        let blocks = self.blocks;
        if blocks == 1 {
            return self.run_single(text, top_hin, visit);
        }
        let mut pv = vec![!0u64; blocks];
        let mut mv = vec![0u64; blocks];
        let mut score = self.len as isize;
        let last = blocks - 1;
        for (j, &sym) in text.iter().enumerate() {
            let eqs = &self.peq[sym as usize * blocks..(sym as usize + 1) * blocks];
            let mut hin = top_hin;
            for b in 0..blocks {
                let mask = if b == last { self.last_mask } else { HIGH_BIT };
                let (p, m, hout) = step(pv[b], mv[b], eqs[b], hin, mask);
                pv[b] = p;
                mv[b] = m;
                hin = hout;
            }
            score += hin as isize;
            if !visit(j + 1, score as usize) {
                return;
            }
        }
    }

    fn run_single(&self, text: &[u32], top_hin: i32, mut visit: impl FnMut(usize, usize) -> bool) {
        let mut pv = !0u64;
        let mut mv = 0u64;
        let mut score = self.len as isize;
        for (j, &sym) in text.iter().enumerate() {
            let (p, m, hout) = step(pv, mv, self.peq[sym as usize], top_hin, self.last_mask);
            pv = p;
            mv = m;
            score += hout as isize;
            if !visit(j + 1, score as usize) {
                return;
            }
        }
    }
}

/// One block of one column. `hin` is the horizontal delta entering the
/// block from above (-1, 0 or +1); the returned delta is read at `out_mask`.
#[inline(always)]
fn step(pv: u64, mv: u64, eq: u64, hin: i32, out_mask: u64) -> (u64, u64, i32) {
    let hin_neg = u64::from(hin < 0);
    let hin_pos = u64::from(hin > 0);
    let xv = eq | mv;
    let eq = eq | hin_neg;
    let xh = ((eq & pv).wrapping_add(pv) ^ pv) | eq;
    let mut ph = mv | !(xh | pv);
    let mut mh = pv & xh;
    let hout = i32::from(ph & out_mask != 0) - i32::from(mh & out_mask != 0);
    ph = (ph << 1) | hin_pos;
    mh = (mh << 1) | hin_neg;
    (mh | !(xv | ph), ph & xv, hout)
}
