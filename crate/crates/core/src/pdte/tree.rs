use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVec;

/// One array slot: threshold, children, feature selector and label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub t: u64,
    pub l: u64,
    pub r: u64,
    /// `None` for leaves, whose selector is all zero.
    pub feature: Option<usize>,
    pub c: u64,
}

fn mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1 << k) - 1
    }
}

impl TreeNode {
    /// A leaf at `index` that points back to itself.
    pub fn leaf(index: usize, label: u64) -> Self {
        TreeNode {
            t: 0,
            l: index as u64,
            r: index as u64,
            feature: None,
            c: label,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature.is_none()
    }

    /// Packs as `t || l || r || v || c`, `4k + n` bits.
    pub fn pack(&self, k: usize, n: usize) -> BitVec {
        let mut out = BitVec::zeros(4 * k + n);
        out.set_bits(0, k, self.t);
        out.set_bits(k, k, self.l);
        out.set_bits(2 * k, k, self.r);
        if let Some(f) = self.feature {
            out.set(3 * k + f, true);
        }
        out.set_bits(3 * k + n, k, self.c);
        out
    }

    pub fn unpack(bits: &BitVec, k: usize, n: usize) -> Result<Self> {
        if bits.len() != 4 * k + n {
            return Err(Error::InvalidTree(format!(
                "node is {} bits, expected {}",
                bits.len(),
                4 * k + n
            )));
        }
        let v = bits.slice(3 * k, n);
        let feature = match v.count_ones() {
            0 => None,
            1 => (0..n).find(|&j| v.get(j)),
            w => {
                return Err(Error::InvalidTree(format!(
                    "feature selector has weight {w}"
                )))
            }
        };
        Ok(TreeNode {
            t: bits.get_bits(0, k),
            l: bits.get_bits(k, k),
            r: bits.get_bits(2 * k, k),
            feature,
            c: bits.get_bits(3 * k + n, k),
        })
    }
}

/// A binary decision tree before encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogicalTree {
    Leaf {
        label: u64,
    },
    /// Goes left when `x[feature] < threshold`.
    Split {
        feature: usize,
        threshold: u64,
        left: Box<LogicalTree>,
        right: Box<LogicalTree>,
    },
}

impl LogicalTree {
    pub fn size(&self) -> usize {
        match self {
            LogicalTree::Leaf { .. } => 1,
            LogicalTree::Split { left, right, .. } => 1 + left.size() + right.size(),
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            LogicalTree::Leaf { .. } => 0,
            LogicalTree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Direct recursive evaluation.
    pub fn eval(&self, x: &[u64]) -> u64 {
        match self {
            LogicalTree::Leaf { label } => *label,
            LogicalTree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] < *threshold {
                    left.eval(x)
                } else {
                    right.eval(x)
                }
            }
        }
    }

    /// A random full binary tree with `m` nodes and depth exactly `d`.
    ///
    /// `m` must be odd with `2d + 1 <= m <= 2^(d+1) - 1`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize, d: usize, n: usize, k: usize) -> Result<Self> {
        let internal = m.saturating_sub(1) / 2;
        let max_internal = if d >= 63 { usize::MAX } else { (1usize << d) - 1 };
        if m % 2 == 0 || internal < d || internal > max_internal || n == 0 {
            return Err(Error::Config(format!(
                "no full binary tree with {m} nodes and depth {d} over {n} features"
            )));
        }
        // Arena of (depth, children); grow a spine to depth d, then split
        // random shallow leaves.
        let mut kids: Vec<Option<(usize, usize)>> = vec![None];
        let mut depth = vec![0usize];
        let split = |at: usize, kids: &mut Vec<Option<(usize, usize)>>, depth: &mut Vec<usize>| {
            let a = kids.len();
            kids.push(None);
            kids.push(None);
            depth.push(depth[at] + 1);
            depth.push(depth[at] + 1);
            kids[at] = Some((a, a + 1));
            (a, a + 1)
        };
        let mut open = Vec::new();
        let mut tip = 0;
        for _ in 0..d {
            let (a, b) = split(tip, &mut kids, &mut depth);
            open.push(b);
            tip = a;
        }
        open.retain(|&j| depth[j] < d);
        for _ in d..internal {
            let pos = rng.gen_range(0..open.len());
            let at = open.swap_remove(pos);
            let (a, b) = split(at, &mut kids, &mut depth);
            open.extend([a, b].into_iter().filter(|&j| depth[j] < d));
        }
        fn build<R: Rng + ?Sized>(
            j: usize,
            kids: &[Option<(usize, usize)>],
            rng: &mut R,
            n: usize,
            k: usize,
        ) -> LogicalTree {
            match kids[j] {
                None => LogicalTree::Leaf {
                    label: rng.gen::<u64>() & mask(k),
                },
                Some((a, b)) => LogicalTree::Split {
                    feature: rng.gen_range(0..n),
                    threshold: rng.gen::<u64>() & mask(k),
                    left: Box::new(build(a, kids, rng, n, k)),
                    right: Box::new(build(b, kids, rng, n, k)),
                },
            }
        }
        Ok(build(0, &kids, rng, n, k))
    }
}

/// A tree laid out as an array with the root at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeArray {
    pub k: usize,
    pub n: usize,
    pub nodes: Vec<TreeNode>,
    /// Depth of the tree itself.
    pub depth: usize,
    /// Number of evaluation steps, at least `depth`.
    pub d_pad: usize,
}

impl TreeArray {
    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    /// Width of a packed node.
    pub fn ell(&self) -> usize {
        4 * self.k + self.n
    }

    /// Checks widths, child ranges and selector shape.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > 64 {
            return Err(Error::InvalidTree(format!("k = {} is outside 1..=64", self.k)));
        }
        if self.nodes.is_empty() {
            return Err(Error::InvalidTree("empty tree".into()));
        }
        if self.d_pad < self.depth {
            return Err(Error::InvalidTree(format!(
                "d_pad {} is below the depth {}",
                self.d_pad, self.depth
            )));
        }
        let m = self.m() as u64;
        if m - 1 > mask(self.k) {
            return Err(Error::InvalidTree(format!(
                "{m} nodes do not fit {}-bit indices",
                self.k
            )));
        }
        for (j, node) in self.nodes.iter().enumerate() {
            let bad = |what: &str| Err(Error::InvalidTree(format!("node {j}: {what}")));
            if node.l >= m || node.r >= m {
                return bad("child index out of range");
            }
            if node.t > mask(self.k) || node.c > mask(self.k) {
                return bad("value wider than k bits");
            }
            match node.feature {
                Some(f) if f >= self.n => return bad("feature id out of range"),
                None if node.l != j as u64 || node.r != j as u64 => {
                    return bad("leaf does not point to itself")
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// All nodes packed back to back.
    pub fn packed(&self) -> BitVec {
        let parts: Vec<BitVec> = self.nodes.iter().map(|nd| nd.pack(self.k, self.n)).collect();
        BitVec::concat(&parts)
    }

    pub fn from_packed(bits: &BitVec, k: usize, n: usize, depth: usize, d_pad: usize) -> Result<Self> {
        let ell = 4 * k + n;
        if bits.len() % ell != 0 {
            return Err(Error::InvalidTree("packed length is not a whole number of nodes".into()));
        }
        let nodes = (0..bits.len() / ell)
            .map(|j| TreeNode::unpack(&bits.slice(j * ell, ell), k, n))
            .collect::<Result<_>>()?;
        let arr = TreeArray {
            k,
            n,
            nodes,
            depth,
            d_pad,
        };
        arr.validate()?;
        Ok(arr)
    }
}

/// Breadth-first layout with self-looped leaves; `d_pad` starts at the depth.
pub fn encode_tree(tree: &LogicalTree, k: usize, n: usize) -> Result<TreeArray> {
    let mut nodes: Vec<TreeNode> = Vec::with_capacity(tree.size());
    let mut queue = VecDeque::from([tree]);
    // Children of the node at position j are enqueued while j is visited, so
    // their positions are known from the running queue length.
    let mut next = 1u64;
    while let Some(t) = queue.pop_front() {
        let j = nodes.len();
        match t {
            LogicalTree::Leaf { label } => nodes.push(TreeNode::leaf(j, *label)),
            LogicalTree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if *feature >= n {
                    return Err(Error::InvalidTree(format!(
                        "node {j}: feature id {feature} out of range for n = {n}"
                    )));
                }
                nodes.push(TreeNode {
                    t: *threshold,
                    l: next,
                    r: next + 1,
                    feature: Some(*feature),
                    // Never the final result once d_pad >= depth.
                    c: 0,
                });
                next += 2;
                queue.push_back(left);
                queue.push_back(right);
            }
        }
    }
    let depth = tree.depth();
    let arr = TreeArray {
        k,
        n,
        nodes,
        depth,
        d_pad: depth,
    };
    arr.validate()?;
    Ok(arr)
}

/// Smallest power of two `>= m`, and at least 2.
pub fn padded_size(m: usize) -> usize {
    m.next_power_of_two().max(2)
}

/// Places the nodes at random slots of a power-of-two array, keeping the
/// root at 0 and filling the rest with self-looped dummy leaves.
pub fn pad_tree<R: Rng + ?Sized>(arr: &TreeArray, rng: &mut R) -> TreeArray {
    let m = arr.m();
    let mp = padded_size(m);
    let mut slots: Vec<usize> = (1..mp).collect();
    slots.shuffle(rng);
    let place = |j: usize| if j == 0 { 0 } else { slots[j - 1] };
    let mut nodes: Vec<TreeNode> = (0..mp).map(|j| TreeNode::leaf(j, 0)).collect();
    for (j, node) in arr.nodes.iter().enumerate() {
        let mut moved = node.clone();
        moved.l = place(node.l as usize) as u64;
        moved.r = place(node.r as usize) as u64;
        nodes[place(j)] = moved;
    }
    TreeArray {
        nodes,
        ..arr.clone()
    }
}

/// Runs the `d_pad`-step walk in the clear.
pub fn plaintext_dte(arr: &TreeArray, x: &[u64]) -> u64 {
    let mut idx = 0usize;
    let mut result = arr.nodes[0].c;
    for _ in 0..arr.d_pad {
        let node = &arr.nodes[idx];
        let xv = node.feature.map_or(0, |f| x[f] & mask(arr.k));
        idx = if xv < node.t { node.l } else { node.r } as usize;
        result = arr.nodes[idx].c;
    }
    result
}
