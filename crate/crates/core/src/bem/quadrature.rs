//! Triangle quadrature: a fixed regular rule, adaptive subdivision for nearby
//! collocation points, and a graded Duffy rule for the weakly singular case.

use crate::geom::Vec3;

/// Symmetric 7-point rule of degree 5: barycentric coordinates and weights
/// summing to one.
pub const DUNAVANT7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const W1: f64 = 0.132_394_152_788_506_16;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_34;
    const W2: f64 = 0.125_939_180_544_827_15;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// 4-point Gauss-Legendre rule on `[0, 1]`.
pub const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Subdivide while the centroid is closer than this many diameters.
pub const NEAR_FACTOR: f64 = 2.5;

/// Deepest level of adaptive subdivision.
pub const MAX_DEPTH: u32 = 9;

/// Split a Duffy sub-triangle while its far edge is longer than this
/// multiple of its shorter side through the singular vertex.
pub const DUFFY_GRADING: f64 = 0.5;

const MAX_DUFFY_DEPTH: u32 = 16;

/// Triangle in barycentric coordinates of a parent element.
type Sub = [[f64; 3]; 3];

fn to_physical(verts: &[Vec3; 3], l: &[f64; 3]) -> Vec3 {
    verts[0] * l[0] + verts[1] * l[1] + verts[2] * l[2]
}

fn lerp(a: &[f64; 3], b: &[f64; 3], t: f64) -> [f64; 3] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

/// Visits quadrature points `(barycentric, point, weight)` for an element
/// seen from collocation point `x` away from the element's vertices.
///
/// Sub-triangles close to `x` relative to their size are split in four.
pub fn adaptive_points(verts: &[Vec3; 3], area: f64, x: &Vec3, mut visit: impl FnMut(&[f64; 3], &Vec3, f64)) {
    let root: Sub = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut stack = vec![(root, 0u32)];
    while let Some((sub, depth)) = stack.pop() {
        let p: [Vec3; 3] = [0, 1, 2].map(|k| to_physical(verts, &sub[k]));
        let diam = (p[0] - p[1]).norm().max((p[1] - p[2]).norm()).max((p[2] - p[0]).norm());
        let centroid = (p[0] + p[1] + p[2]) / 3.0;
        if depth < MAX_DEPTH && (x - centroid).norm() < NEAR_FACTOR * diam {
            let m01 = lerp(&sub[0], &sub[1], 0.5);
            let m12 = lerp(&sub[1], &sub[2], 0.5);
            let m20 = lerp(&sub[2], &sub[0], 0.5);
            // pushed in reverse so children are visited in a fixed order
            stack.push(([m01, m12, m20], depth + 1));
            stack.push(([m20, m12, sub[2]], depth + 1));
            stack.push(([m01, sub[1], m12], depth + 1));
            stack.push(([sub[0], m01, m20], depth + 1));
            continue;
        }
        let sub_area = area * 0.25f64.powi(depth as i32);
        for (q, w) in DUNAVANT7.iter() {
            let l = [
                q[0] * sub[0][0] + q[1] * sub[1][0] + q[2] * sub[2][0],
                q[0] * sub[0][1] + q[1] * sub[1][1] + q[2] * sub[2][1],
                q[0] * sub[0][2] + q[1] * sub[1][2] + q[2] * sub[2][2],
            ];
            visit(&l, &to_physical(verts, &l), w * sub_area);
        }
    }
}

/// Visits Duffy quadrature points for an element whose vertex `corner` is the
/// collocation point. Weights include the Jacobian, which vanishes linearly
/// at the corner and cancels the `1/r` singularity.
pub fn duffy_points(verts: &[Vec3; 3], corner: usize, mut visit: impl FnMut(&[f64; 3], &Vec3, f64)) {
    let mut a = [0.0; 3];
    a[corner] = 1.0;
    let mut b = [0.0; 3];
    b[(corner + 1) % 3] = 1.0;
    let mut c = [0.0; 3];
    c[(corner + 2) % 3] = 1.0;
    let pa = verts[corner];
    let mut stack = vec![(b, c, 0u32)];
    while let Some((p, q, depth)) = stack.pop() {
        let xp = to_physical(verts, &p);
        let xq = to_physical(verts, &q);
        let far = (xq - xp).norm();
        let near = (xp - pa).norm().min((xq - pa).norm());
        if depth < MAX_DUFFY_DEPTH && far > DUFFY_GRADING * near {
            let m = lerp(&p, &q, 0.5);
            stack.push((m, q, depth + 1));
            stack.push((p, m, depth + 1));
            continue;
        }
        let twice_area = (xp - pa).cross(&(xq - pa)).norm();
        for (u, wu) in GAUSS4 {
            for (v, wv) in GAUSS4 {
                let l = [
                    (1.0 - u) * a[0] + u * (1.0 - v) * p[0] + u * v * q[0],
                    (1.0 - u) * a[1] + u * (1.0 - v) * p[1] + u * v * q[1],
                    (1.0 - u) * a[2] + u * (1.0 - v) * p[2] + u * v * q[2],
                ];
                visit(&l, &to_physical(verts, &l), wu * wv * twice_area * u);
            }
        }
    }
}
