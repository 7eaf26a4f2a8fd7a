//! Axis-aligned bounding-volume tree over the segments of a curve.
//!
//! Built once per curve; used for ball-overlap queries in the oracles and for
//! nearest-point projection in the isotopy check.

use crate::curve::DiscreteCurve;
use crate::geom;

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug)]
enum Node {
    Leaf { start: u32, end: u32 },
    Inner { left: u32, right: u32 },
}

/// Closest curve point found by [`SegmentBvh::nearest`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nearest {
    pub component: usize,
    pub segment: usize,
    pub t: f64,
    pub distance: f64,
}

pub struct SegmentBvh<'a> {
    curve: &'a DiscreteCurve,
    dim: usize,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    items: Vec<(u32, u32)>,
}

impl<'a> SegmentBvh<'a> {
    pub fn new(curve: &'a DiscreteCurve) -> SegmentBvh<'a> {
        let dim = curve.dim();
        let mut items: Vec<(u32, u32)> = curve.segments().map(|(c, i)| (c as u32, i as u32)).collect();
        let centers: Vec<f64> = items
            .iter()
            .flat_map(|&(c, i)| {
                let r = curve.ring(c as usize);
                geom::lerp(r.vertex(i as usize), r.vertex(i as usize + 1), 0.5)
            })
            .collect();
        let mut order: Vec<usize> = (0..items.len()).collect();
        let mut bvh = SegmentBvh {
            curve,
            dim,
            nodes: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            items: Vec::new(),
        };
        let n = order.len();
        bvh.build(&mut order, 0, n, &centers);
        bvh.items = order.iter().map(|&k| items[k]).collect();
        items.clear();
        bvh
    }

    fn build(&mut self, order: &mut [usize], start: usize, end: usize, centers: &[f64]) -> u32 {
        let dim = self.dim;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        let mut clo = vec![f64::INFINITY; dim];
        let mut chi = vec![f64::NEG_INFINITY; dim];
        for &k in &order[start..end] {
            let (c, i) = self.segment_of(k);
            let r = self.curve.ring(c);
            for p in [r.vertex(i), r.vertex(i + 1)] {
                for d in 0..dim {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            for d in 0..dim {
                clo[d] = clo[d].min(centers[k * dim + d]);
                chi[d] = chi[d].max(centers[k * dim + d]);
            }
        }
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);
        if end - start <= LEAF_SIZE {
            self.nodes[id] = Node::Leaf {
                start: start as u32,
                end: end as u32,
            };
            return id as u32;
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (chi[a] - clo[a]).partial_cmp(&(chi[b] - clo[b])).unwrap())
            .unwrap();
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&x, &y| {
            centers[x * dim + axis]
                .partial_cmp(&centers[y * dim + axis])
                .unwrap()
                .then(x.cmp(&y))
        });
        let left = self.build(order, start, mid, centers);
        let right = self.build(order, mid, end, centers);
        self.nodes[id] = Node::Inner { left, right };
        id as u32
    }

    // During construction `order` holds indices into `curve.segments()`.
    fn segment_of(&self, k: usize) -> (usize, usize) {
        let mut k = k;
        for (c, r) in self.curve.rings().iter().enumerate() {
            if k < r.len() {
                return (c, k);
            }
            k -= r.len();
        }
        unreachable!("segment index out of range")
    }

    pub fn curve(&self) -> &'a DiscreteCurve {
        self.curve
    }

    fn box_dist2(&self, node: usize, p: &[f64]) -> f64 {
        let dim = self.dim;
        let mut d2 = 0.0;
        for d in 0..dim {
            let lo = self.lo[node * dim + d];
            let hi = self.hi[node * dim + d];
            let x = p[d];
            let e = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            d2 += e * e;
        }
        d2
    }

    /// Calls `f(component, segment)` for every segment whose box meets the
    /// open ball `B(center, r)`; stops and returns `true` as soon as `f` does.
    pub fn any_in_ball<F: FnMut(usize, usize) -> bool>(&self, center: &[f64], r: f64, mut f: F) -> bool {
        let r2 = r * r;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let id = id as usize;
            if self.box_dist2(id, center) >= r2 {
                continue;
            }
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    for &(c, i) in &self.items[start as usize..end as usize] {
                        if f(c as usize, i as usize) {
                            return true;
                        }
                    }
                }
                Node::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }

    /// Closest point on any segment accepted by `keep`.
    pub fn nearest<F: Fn(usize, usize) -> bool>(&self, p: &[f64], keep: F) -> Option<Nearest> {
        let mut best: Option<Nearest> = None;
        let mut best_d2 = f64::INFINITY;
        let mut stack = vec![(0u32, self.box_dist2(0, p))];
        while let Some((id, bd)) = stack.pop() {
            if bd > best_d2 {
                continue;
            }
            match self.nodes[id as usize] {
                Node::Leaf { start, end } => {
                    for &(c, i) in &self.items[start as usize..end as usize] {
                        let (c, i) = (c as usize, i as usize);
                        if !keep(c, i) {
                            continue;
                        }
                        let r = self.curve.ring(c);
                        let (t, d2) = geom::point_segment(p, r.vertex(i), r.vertex(i + 1));
                        // ties go to the lower (component, segment) index
                        let better =
                            d2 < best_d2 || (d2 == best_d2 && best.is_some_and(|b| (c, i) < (b.component, b.segment)));
                        if better {
                            best_d2 = d2;
                            best = Some(Nearest {
                                component: c,
                                segment: i,
                                t,
                                distance: d2.sqrt(),
                            });
                        }
                    }
                }
                Node::Inner { left, right } => {
                    let dl = self.box_dist2(left as usize, p);
                    let dr = self.box_dist2(right as usize, p);
                    // visit the closer child first
                    if dl <= dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        best
    }
}
