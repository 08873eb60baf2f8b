use crate::error::{AbortReason, Result};
use crate::gf2::BitVec;
use crate::rss::{Party, RssShare, VerifyMode};

impl Party {
    /// Bitwise AND, verified according to the engine's [`VerifyMode`].
    pub fn and_gate(&mut self, x: &RssShare, y: &RssShare) -> Result<RssShare> {
        let z = self.mul_bits(x, y)?;
        let t = self.take_triples(x.width())?;
        match self.cfg.verify {
            VerifyMode::Immediate => self.sacrifice(x, y, &z, &t)?,
            VerifyMode::Deferred => self.pending.push(x, y, &z, &t),
        }
        Ok(z)
    }

    /// Bitwise AND followed by its sacrifice check.
    pub fn and_verified(&mut self, x: &RssShare, y: &RssShare) -> Result<RssShare> {
        let z = self.mul_bits(x, y)?;
        let t = self.take_triples(x.width())?;
        self.sacrifice(x, y, &z, &t)?;
        Ok(z)
    }

    /// Number of AND gates waiting for their check.
    pub fn pending_ands(&self) -> usize {
        self.pending.len()
    }

    /// Runs the sacrifice check for every queued AND gate.
    pub fn verify_pending(&mut self) -> Result<()> {
        let p = self.pending.take();
        if p.len() == 0 {
            return Ok(());
        }
        self.sacrifice(&p.x, &p.y, &p.z, &p.t)
    }

    /// `[idx == j]` for a public `j`.
    pub fn eq_test(&mut self, idx: &RssShare, j: u64) -> Result<RssShare> {
        self.eq_test_many(std::slice::from_ref(idx), &[j])
    }

    /// `[idx_t == j]` for every shared `idx_t` and every public `j`, as a
    /// packed vector indexed by `t * js.len() + q`. Each test costs
    /// `width - 1` AND gates in `ceil(log2 width)` rounds.
    pub fn eq_test_many(&mut self, idxs: &[RssShare], js: &[u64]) -> Result<RssShare> {
        let me = self.id();
        let rows = idxs.len() * js.len();
        let Some(lm) = idxs.first().map(|i| i.width()) else {
            return Ok(RssShare::zeros(me, 0));
        };
        // Bit-planes: plane q holds bit q of (idx_t ^ !j) for every row.
        let mut planes: Vec<RssShare> = (0..lm)
            .map(|q| {
                let mut pattern = BitVec::zeros(rows);
                let mut plane = RssShare::zeros(me, rows);
                for (t, idx) in idxs.iter().enumerate() {
                    assert_eq!(idx.width(), lm, "index widths differ");
                    let base = t * js.len();
                    let bits = [idx.own.get(q), idx.prev.get(q)];
                    for (r, &j) in js.iter().enumerate() {
                        if (j >> q) & 1 == 0 {
                            pattern.set(base + r, true);
                        }
                    }
                    if bits[0] {
                        plane.own.xor_at(base, &BitVec::ones(js.len()));
                    }
                    if bits[1] {
                        plane.prev.xor_at(base, &BitVec::ones(js.len()));
                    }
                }
                plane.xor_public(&pattern)
            })
            .collect();
        while planes.len() > 1 {
            let half = planes.len() / 2;
            let left = RssShare::concat(me, &planes[..half]);
            let right = RssShare::concat(me, &planes[half..2 * half]);
            let prod = self.and_gate(&left, &right)?;
            let mut next: Vec<RssShare> = (0..half).map(|q| prod.slice(q * rows, rows)).collect();
            if planes.len() % 2 == 1 {
                next.push(planes.pop().unwrap());
            }
            planes = next;
        }
        Ok(planes.pop().unwrap())
    }

    /// Shared unit vectors `e_idx` of length `m`, one per index.
    pub fn unit_vectors(&mut self, idxs: &[RssShare], m: usize) -> Result<Vec<RssShare>> {
        let js: Vec<u64> = (0..m as u64).collect();
        let all = self.eq_test_many(idxs, &js)?;
        Ok((0..idxs.len()).map(|t| all.slice(t * m, m)).collect())
    }

    /// `[x < t]` for unsigned integers shared bitwise, least significant bit
    /// first. Uses `2k - 1` AND gates in `k` rounds.
    pub fn lt_compare(&mut self, x: &RssShare, t: &RssShare) -> Result<RssShare> {
        let me = self.id();
        let k = x.width();
        assert_eq!(k, t.width(), "operand widths differ");
        assert!(k > 0);
        let d = x.xor(t);
        if k == 1 {
            return self.and_gate(&d, t);
        }
        // eq: all bits above the current position agree.
        // u_i = eq & d_i marks i as the first difference; then x < t iff t_i.
        let mut eq = d.bit(k - 1).not();
        let r = self.and_gate(
            &RssShare::concat(me, [&d.bit(k - 1), &eq]),
            &RssShare::concat(me, [&t.bit(k - 1), &d.bit(k - 2)]),
        )?;
        let mut lt = r.bit(0);
        let mut u = r.bit(1);
        for i in (1..k - 1).rev() {
            eq.xor_assign(&u);
            let r = self.and_gate(
                &RssShare::concat(me, [&u, &eq]),
                &RssShare::concat(me, [&t.bit(i), &d.bit(i - 1)]),
            )?;
            lt.xor_assign(&r.bit(0));
            u = r.bit(1);
        }
        let g0 = self.and_gate(&u, &t.bit(0))?;
        lt.xor_assign(&g0);
        Ok(lt)
    }

    /// `b ? l : r` for a shared bit `b`, with `k` AND gates.
    pub fn mux_index(&mut self, b: &RssShare, l: &RssShare, r: &RssShare) -> Result<RssShare> {
        assert_eq!(b.width(), 1);
        let k = l.width();
        let sel = self.and_gate(&b.repeat_bits(k), &l.xor(r))?;
        Ok(r.xor(&sel))
    }

    /// Checks that every bit of `w` is zero by opening it.
    pub fn assert_zero(&mut self, w: &RssShare) -> Result<()> {
        self.assert_zero_bits(w, AbortReason::SacrificeFailed)
    }
}
