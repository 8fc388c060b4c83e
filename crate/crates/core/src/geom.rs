//! Small 3-vector helpers shared by the mesh and kernel code.

pub use nalgebra::{Rotation3, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;

/// 3x3 block stored row-major.
pub type Block = [[f64; 3]; 3];

pub const ZERO_BLOCK: Block = [[0.0; 3]; 3];

#[inline]
pub fn add_block(acc: &mut Block, b: &Block) {
    for i in 0..3 {
        for j in 0..3 {
            acc[i][j] += b[i][j];
        }
    }
}

#[inline]
pub fn sub_block(acc: &mut Block, b: &Block) {
    for i in 0..3 {
        for j in 0..3 {
            acc[i][j] -= b[i][j];
        }
    }
}

/// Area-weighted normal of a triangle, i.e. `(b - a) x (c - a) / 2`.
#[inline]
pub fn triangle_vector_area(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    0.5 * (b - a).cross(&(c - a))
}

/// Unit vector along `v`, or `None` for a (near) zero vector.
pub fn unit(v: &Vec3) -> Option<Vec3> {
    let n = v.norm();
    (n > f64::MIN_POSITIVE * 1e6).then(|| v / n)
}

/// Any unit vector orthogonal to `t` (assumed unit).
pub fn any_orthogonal(t: &Vec3) -> Vec3 {
    let trial = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (trial - t * t.dot(&trial)).normalize()
}
