//! Expression trees for scalar fields over R^d.

use super::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sqr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    /// Extended division (`x / 0 = ±inf`).
    Div,
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RbfKernel {
    /// Fundamental solution of the Laplacian: `ln r` in 2D, `1/r` in 3D.
    Harmonic,
    /// `exp(-r² / sigma²)`
    Gaussian { sigma: f64 },
}

/// Radial basis function sum `bias + Σ w_i φ(‖p − c_i‖)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rbf {
    pub kernel: RbfKernel,
    pub bias: f64,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate `x_i`.
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Powi(Box<Expr>, i32),
    /// Polynomial smooth minimum with blend radius `k`:
    /// `min(a, b) − max(k − |a − b|, 0)² / (4k)`.
    SmoothMin(Box<Expr>, Box<Expr>, f64),
    /// Euclidean norm of the argument vector.
    Norm(Vec<Expr>),
    Dot(Vec<Expr>, Vec<Expr>),
    /// `‖p − c‖² − r²` (circle in 2D, sphere in 3D).
    Sphere { center: Vec<f64>, radius: f64 },
    /// `n · p − offset`
    Plane { normal: Vec<f64>, offset: f64 },
    /// `(sqrt((x−cx)² + (y−cy)²) − R)² + (z−cz)² − r²`, axis along z.
    Torus { center: [f64; 3], major: f64, minor: f64 },
    Rbf(Rbf),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn smooth_min(a: Expr, b: Expr, k: f64) -> Expr {
        Expr::SmoothMin(Box::new(a), Box::new(b), k)
    }

    pub fn eval<S: Scalar>(&self, p: &[S]) -> S {
        match self {
            Expr::Const(c) => S::cst(*c),
            Expr::Var(i) => p[*i],
            Expr::Unary(op, a) => {
                let a = a.eval(p);
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Ln => a.ln(),
                    UnaryOp::Sqrt => a.sqrt(),
                    UnaryOp::Abs => a.abs(),
                    UnaryOp::Sqr => a.sqr(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(p), b.eval(p));
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Min => a.min(b),
                    BinaryOp::Max => a.max(b),
                }
            }
            Expr::Powi(a, n) => a.eval(p).powi(*n),
            Expr::SmoothMin(a, b, k) => {
                let (a, b) = (a.eval(p), b.eval(p));
                let h = (S::cst(*k) - (a - b).abs()).max(S::cst(0.0));
                a.min(b) - h.sqr() / S::cst(4.0 * k)
            }
            Expr::Norm(args) => args
                .iter()
                .fold(S::cst(0.0), |acc, e| acc + e.eval(p).sqr())
                .sqrt(),
            Expr::Dot(a, b) => a
                .iter()
                .zip(b)
                .fold(S::cst(0.0), |acc, (x, y)| acc + x.eval(p) * y.eval(p)),
            Expr::Sphere { center, radius } => {
                let mut acc = S::cst(-radius * radius);
                for (x, c) in p.iter().zip(center) {
                    acc = acc + (*x - S::cst(*c)).sqr();
                }
                acc
            }
            Expr::Plane { normal, offset } => {
                let mut acc = S::cst(-offset);
                for (x, n) in p.iter().zip(normal) {
                    acc = acc + *x * S::cst(*n);
                }
                acc
            }
            Expr::Torus { center, major, minor } => {
                let dx = p[0] - S::cst(center[0]);
                let dy = p[1] - S::cst(center[1]);
                let dz = p[2] - S::cst(center[2]);
                let q = (dx.sqr() + dy.sqr()).sqrt() - S::cst(*major);
                q.sqr() + dz.sqr() - S::cst(minor * minor)
            }
            Expr::Rbf(rbf) => {
                let dim = p.len();
                let mut acc = S::cst(rbf.bias);
                for (c, w) in rbf.centers.iter().zip(&rbf.weights) {
                    let mut r2 = S::cst(0.0);
                    for (x, ci) in p.iter().zip(c) {
                        r2 = r2 + (*x - S::cst(*ci)).sqr();
                    }
                    let phi = match rbf.kernel {
                        RbfKernel::Harmonic if dim == 2 => r2.ln() * S::cst(0.5),
                        RbfKernel::Harmonic => S::cst(1.0) / r2.sqrt(),
                        RbfKernel::Gaussian { sigma } => {
                            (-(r2 / S::cst(sigma * sigma))).exp()
                        }
                    };
                    acc = acc + S::cst(*w) * phi;
                }
                acc
            }
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut m: Option<usize> = None;
        self.visit(&mut |e| {
            let idx = match e {
                Expr::Var(i) => Some(*i),
                Expr::Sphere { center, .. } => Some(center.len() - 1),
                Expr::Plane { normal, .. } => Some(normal.len() - 1),
                Expr::Torus { .. } => Some(2),
                Expr::Rbf(r) => r.centers.first().map(|c| c.len() - 1),
                _ => None,
            };
            if let Some(i) = idx {
                m = Some(m.map_or(i, |m| m.max(i)));
            }
        });
        m
    }

    /// Calls `f` on every node, parents before children.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Unary(_, a) | Expr::Powi(a, _) => a.visit(f),
            Expr::Binary(_, a, b) | Expr::SmoothMin(a, b, _) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Norm(v) => v.iter().for_each(|e| e.visit(f)),
            Expr::Dot(a, b) => a.iter().chain(b).for_each(|e| e.visit(f)),
            _ => {}
        }
    }

    /// Value of a coordinate-free expression.
    pub fn as_constant(&self) -> Option<f64> {
        if self.max_var().is_some() {
            return None;
        }
        let v: f64 = self.eval::<f64>(&[]);
        Some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    #[test]
    fn smooth_min_at_symmetric_point() {
        let e = Expr::smooth_min(Expr::Const(0.3), Expr::Const(0.3), 0.1);
        let v: f64 = e.eval(&[]);
        assert!((v - (0.3 - 0.1 / 4.0)).abs() < 1e-15);
        // Far apart the blend vanishes.
        let e = Expr::smooth_min(Expr::Const(0.0), Expr::Const(1.0), 0.1);
        assert_eq!(e.eval::<f64>(&[]), 0.0);
    }

    #[test]
    fn circle_over_unit_square() {
        let e = Expr::Sphere { center: vec![0.0, 0.0], radius: 1.0 };
        let b = [Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)];
        assert_eq!(e.eval(&b), Interval::new(-1.0, 1.0));
        assert_eq!(e.eval::<f64>(&[2.0, 0.0]), 3.0);
    }

    #[test]
    fn constant_detection() {
        let e = Expr::binary(BinaryOp::Mul, Expr::Const(2.0), Expr::Const(3.0));
        assert_eq!(e.as_constant(), Some(6.0));
        assert_eq!(Expr::Var(1).as_constant(), None);
        assert_eq!(Expr::Var(1).max_var(), Some(1));
    }
}
