//! Collocation assembly of the single-layer matrix `V` and the double-layer
//! matrix `K`, in full or entry by entry.
//!
//! With `D u(x) = ∫ T(x, y) n(y) u(y) dy`, the discrete boundary equation
//! reads `V f = K u` with `K = -(I/2 + D)`, where `f` is the traction the
//! fluid exerts on the body. Diagonal blocks of `K` are fixed by the rigid
//! mode identity `(I/2 + D) c = c` for constant `c`, so that
//! `K_ii = -I + Σ_{j≠i} D_ij`.
//!
//! Elements touching the collocation node contribute nothing to `D`: the
//! offset `x - y` lies in their plane. They are skipped in every code path.

use faer::Mat;
use rayon::prelude::*;

use crate::bem::kernels::{stokeslet_r, stresslet_r};
use crate::bem::quadrature::{adaptive_points, duffy_points};
use crate::error::{Error, Result};
use crate::geom::{add_block, Block, Vec3, ZERO_BLOCK};
use crate::mesh::SurfaceMesh;

/// Which operator a matrix entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    V,
    K,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::V => "V",
            Operator::K => "K",
        }
    }
}

/// Dense operators of one mesh.
#[derive(Clone, Debug)]
pub struct BemOperators {
    pub v: Mat<f64>,
    pub k: Mat<f64>,
    pub fingerprint: u64,
}

impl BemOperators {
    pub fn dof_count(&self) -> usize {
        self.v.nrows()
    }

    pub fn get(&self, op: Operator) -> &Mat<f64> {
        match op {
            Operator::V => &self.v,
            Operator::K => &self.k,
        }
    }
}

/// FNV-1a hash of the node coordinates and connectivity.
pub fn mesh_fingerprint(mesh: &SurfaceMesh) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for p in mesh.nodes() {
        for c in p.iter() {
            eat(c.to_bits());
        }
    }
    for t in mesh.triangles() {
        for &i in t {
            eat(i as u64);
        }
    }
    h
}

/// Single- and double-layer blocks of element `e` for its three vertices,
/// seen from node `i`.
pub(crate) struct ElementBlocks {
    pub v: [Block; 3],
    pub d: [Block; 3],
}

pub(crate) fn element_blocks(mesh: &SurfaceMesh, i: usize, e: usize) -> ElementBlocks {
    let tri = mesh.triangles()[e];
    let nodes = mesh.nodes();
    let x = nodes[i];
    let verts: [Vec3; 3] = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
    let mut out = ElementBlocks { v: [ZERO_BLOCK; 3], d: [ZERO_BLOCK; 3] };
    if let Some(corner) = tri.iter().position(|&n| n == i) {
        duffy_points(&verts, corner, |l, y, w| {
            let g = stokeslet_r(&(x - y));
            accumulate(&mut out.v, &g, l, w);
        });
    } else {
        let n = mesh.normals()[e];
        adaptive_points(&verts, mesh.areas()[e], &x, |l, y, w| {
            let r = x - y;
            accumulate(&mut out.v, &stokeslet_r(&r), l, w);
            accumulate(&mut out.d, &stresslet_r(&r, &n), l, w);
        });
    }
    out
}

#[inline]
fn accumulate(acc: &mut [Block; 3], k: &Block, l: &[f64; 3], w: f64) {
    for (a, blk) in acc.iter_mut().enumerate() {
        let s = w * l[a];
        for p in 0..3 {
            for q in 0..3 {
                blk[p][q] += s * k[p][q];
            }
        }
    }
}

fn check_finite(blocks: &ElementBlocks, row: usize, element: usize) -> Result<()> {
    let ok = blocks.v.iter().chain(&blocks.d).flatten().flatten().all(|x| x.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::NonFinite { row, element })
    }
}

/// Blocks of row node `i` against every node: `(V_i·, D_i·)`.
pub(crate) fn row_blocks(mesh: &SurfaceMesh, i: usize) -> Result<(Vec<Block>, Vec<Block>)> {
    let n = mesh.node_count();
    let mut vrow = vec![ZERO_BLOCK; n];
    let mut drow = vec![ZERO_BLOCK; n];
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let blocks = element_blocks(mesh, i, e);
        check_finite(&blocks, i, e)?;
        let adjacent = tri.contains(&i);
        for a in 0..3 {
            add_block(&mut vrow[tri[a]], &blocks.v[a]);
            if !adjacent {
                add_block(&mut drow[tri[a]], &blocks.d[a]);
            }
        }
    }
    Ok((vrow, drow))
}

/// Diagonal block of `K` from a row of `D` blocks.
pub(crate) fn k_diagonal(drow: &[Block], i: usize) -> Block {
    let mut acc = ZERO_BLOCK;
    for (j, b) in drow.iter().enumerate() {
        if j != i {
            add_block(&mut acc, b);
        }
    }
    for (a, row) in acc.iter_mut().enumerate() {
        row[a] -= 1.0;
    }
    acc
}

#[inline]
fn neg(b: &Block) -> Block {
    b.map(|r| r.map(|x| -x))
}

/// Assembles `V` and `K`, parallel over collocation rows.
pub fn assemble(mesh: &SurfaceMesh) -> Result<BemOperators> {
    let n = mesh.node_count();
    let rows: Vec<(Vec<Block>, Vec<Block>)> =
        (0..n).into_par_iter().map(|i| row_blocks(mesh, i)).collect::<Result<_>>()?;
    let nd = 3 * n;
    let mut v = Mat::zeros(nd, nd);
    let mut k = Mat::zeros(nd, nd);
    for (i, (vrow, drow)) in rows.iter().enumerate() {
        for j in 0..n {
            let kb = if i == j { k_diagonal(drow, i) } else { neg(&drow[j]) };
            for a in 0..3 {
                for b in 0..3 {
                    v[(3 * i + a, 3 * j + b)] = vrow[j][a][b];
                    k[(3 * i + a, 3 * j + b)] = kb[a][b];
                }
            }
        }
    }
    Ok(BemOperators { v, k, fingerprint: mesh_fingerprint(mesh) })
}

pub fn assemble_v(mesh: &SurfaceMesh) -> Result<Mat<f64>> {
    Ok(assemble(mesh)?.v)
}

pub fn assemble_k(mesh: &SurfaceMesh) -> Result<Mat<f64>> {
    Ok(assemble(mesh)?.k)
}

/// Assembles only the listed entries of one operator. Entries are linear
/// row-major indices `row * N_delta + col`. Values are bitwise equal to the
/// corresponding entries of [`assemble`].
pub fn assemble_entries(mesh: &SurfaceMesh, op: Operator, entries: &[usize]) -> Result<Vec<f64>> {
    let nd = mesh.dof_count();
    let size = nd * nd;
    if let Some(&bad) = entries.iter().find(|&&e| e >= size) {
        return Err(Error::IndexOutOfRange { index: bad, size });
    }
    // rows whose K diagonal block is requested need a full D row
    let mut diag_rows: Vec<usize> = entries
        .iter()
        .filter(|_| op == Operator::K)
        .map(|&e| (e / nd / 3, (e % nd) / 3))
        .filter(|(i, j)| i == j)
        .map(|(i, _)| i)
        .collect();
    diag_rows.sort_unstable();
    diag_rows.dedup();
    let diag: Vec<(usize, Block)> = diag_rows
        .par_iter()
        .map(|&i| row_blocks(mesh, i).map(|(_, d)| (i, k_diagonal(&d, i))))
        .collect::<Result<_>>()?;

    entries
        .par_iter()
        .map(|&e| {
            let (r, c) = (e / nd, e % nd);
            let (i, a, j, b) = (r / 3, r % 3, c / 3, c % 3);
            if op == Operator::K && i == j {
                let k = diag.binary_search_by_key(&i, |d| d.0).expect("diagonal row computed");
                return Ok(diag[k].1[a][b]);
            }
            let mut acc = ZERO_BLOCK;
            for &el in &mesh.node_elements()[j] {
                let tri = mesh.triangles()[el];
                let blocks = element_blocks(mesh, i, el);
                check_finite(&blocks, i, el)?;
                let local = tri.iter().position(|&n| n == j).expect("incident element");
                match op {
                    Operator::V => add_block(&mut acc, &blocks.v[local]),
                    Operator::K => {
                        if !tri.contains(&i) {
                            add_block(&mut acc, &blocks.d[local]);
                        }
                    }
                }
            }
            Ok(match op {
                Operator::V => acc[a][b],
                Operator::K => neg(&acc)[a][b],
            })
        })
        .collect()
}
