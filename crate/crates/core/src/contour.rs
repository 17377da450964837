//! Zero-level contours of lattice data by marching squares.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Dim, Grid};
use crate::math::Vec2;

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

/// Contours of `{values ≤ 0}` against `{values > 0}` over cells whose four
/// corners hold finite values.
///
/// Crossings are placed by linear interpolation along lattice edges and then
/// passed to `refine(inside, outside, guess)`, which may move them along the
/// edge. Saddle cells are resolved with the cell average. In 1D every sign
/// change is returned as a one-point polyline.
pub fn marching_squares<F>(grid: &Grid, values: &[f64], refine: F) -> Vec<Polyline>
where
    F: Fn(Vec2, Vec2, Vec2) -> Vec2,
{
    let (nx, ny) = grid.shape();
    let crossing = |a: usize, b: usize| -> Vec2 {
        let (va, vb) = (values[a], values[b]);
        let (pa, pb) = (grid.pos(a), grid.pos(b));
        let t = va / (va - vb);
        let guess = pa + (pb - pa).scale(t);
        if va <= 0.0 {
            refine(pa, pb, guess)
        } else {
            refine(pb, pa, guess)
        }
    };
    if grid.dim() == Dim::One {
        let mut out = Vec::new();
        for i in 0..nx - 1 {
            let (va, vb) = (values[i], values[i + 1]);
            if va.is_finite() && vb.is_finite() && ((va <= 0.0) != (vb <= 0.0)) {
                out.push(Polyline {
                    points: vec![crossing(i, i + 1)],
                    closed: false,
                });
            }
        }
        return out;
    }

    // edge ids: 2·node for the edge to the right, 2·node + 1 for the edge up
    let mut links: Vec<[u32; 2]> = vec![[u32::MAX; 2]; 2 * nx * ny];
    let mut segs: Vec<(u32, u32)> = Vec::new();
    let add_link = |links: &mut Vec<[u32; 2]>, e: u32, s: u32| {
        let l = &mut links[e as usize];
        if l[0] == u32::MAX {
            l[0] = s;
        } else {
            l[1] = s;
        }
    };
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let n00 = grid.index(i, j);
            let n10 = grid.index(i + 1, j);
            let n01 = grid.index(i, j + 1);
            let n11 = grid.index(i + 1, j + 1);
            let v = [values[n00], values[n10], values[n11], values[n01]];
            if !v.iter().all(|x| x.is_finite()) {
                continue;
            }
            let inside = v.map(|x| x <= 0.0);
            let code = inside
                .iter()
                .enumerate()
                .fold(0u8, |c, (k, &b)| c | ((b as u8) << k));
            if code == 0 || code == 15 {
                continue;
            }
            // edges: bottom, right, top, left
            let e = [
                2 * n00 as u32,
                2 * n10 as u32 + 1,
                2 * n01 as u32,
                2 * n00 as u32 + 1,
            ];
            let pairs: &[(usize, usize)] = match code {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(2, 3)],
                5 | 10 => {
                    let centre_inside = (v[0] + v[1] + v[2] + v[3]) <= 0.0;
                    // corners 0 and 2 share a state
                    if (code == 5) == centre_inside {
                        &[(3, 2), (0, 1)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                let s = segs.len() as u32;
                segs.push((e[a], e[b]));
                add_link(&mut links, e[a], s);
                add_link(&mut links, e[b], s);
            }
        }
    }

    let edge_point = |e: u32| -> Vec2 {
        let node = (e / 2) as usize;
        let other = if e % 2 == 0 { node + 1 } else { node + nx };
        crossing(node, other)
    };

    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    for s0 in 0..segs.len() {
        if used[s0] {
            continue;
        }
        used[s0] = true;
        let (a, b) = segs[s0];
        let mut chain = alloc::collections::VecDeque::new();
        chain.push_back(a);
        chain.push_back(b);
        let mut closed = false;
        // extend forward from b, then backward from a
        for forward in [true, false] {
            let mut cur_edge = if forward { b } else { a };
            let mut cur_seg = s0 as u32;
            loop {
                let l = links[cur_edge as usize];
                let next = if l[0] == cur_seg { l[1] } else { l[0] };
                if next == u32::MAX {
                    break;
                }
                if used[next as usize] {
                    if next as usize == s0 {
                        closed = true;
                    }
                    break;
                }
                used[next as usize] = true;
                let (p, q) = segs[next as usize];
                let nxt_edge = if p == cur_edge { q } else { p };
                if forward {
                    chain.push_back(nxt_edge);
                } else {
                    chain.push_front(nxt_edge);
                }
                cur_edge = nxt_edge;
                cur_seg = next;
            }
            if closed {
                break;
            }
        }
        if closed && chain.front() == chain.back() {
            chain.pop_back();
        }
        out.push(Polyline {
            points: chain.into_iter().map(edge_point).collect(),
            closed,
        });
    }
    out
}

/// Marching squares with plain linear crossings.
pub fn zero_contours(grid: &Grid, values: &[f64]) -> Vec<Polyline> {
    marching_squares(grid, values, |_, _, g| g)
}
