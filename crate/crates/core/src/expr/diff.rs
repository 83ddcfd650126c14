use super::{Expr, Func};

pub(super) fn differentiate(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Var(v) => Expr::Num(if &**v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => -differentiate(a, var),
        Expr::Add(a, b) => differentiate(a, var) + differentiate(b, var),
        Expr::Sub(a, b) => differentiate(a, var) - differentiate(b, var),
        Expr::Mul(a, b) => {
            differentiate(a, var) * (**b).clone() + (**a).clone() * differentiate(b, var)
        }
        Expr::Div(a, b) => {
            let num = differentiate(a, var) * (**b).clone() - (**a).clone() * differentiate(b, var);
            num / (**b).clone().powi(2)
        }
        Expr::Pow(a, r) => {
            if r.num() == 0 {
                return Expr::Num(0.0);
            }
            let lowered = r.minus_one();
            Expr::Num(r.to_f64()) * (**a).clone().pow(lowered) * differentiate(a, var)
        }
        Expr::Call(f, a) => {
            let u = (**a).clone();
            let du = differentiate(a, var);
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, u),
                Func::Cos => -Expr::call(Func::Sin, u),
                Func::Tan => 1.0 / Expr::call(Func::Cos, u).powi(2),
                Func::Exp => Expr::call(Func::Exp, u),
                Func::Ln => 1.0 / u,
                Func::Sqrt => 1.0 / (2.0 * Expr::call(Func::Sqrt, u)),
                Func::Atan => 1.0 / (1.0 + u.powi(2)),
            };
            outer * du
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn at(e: &crate::expr::Expr, t: f64) -> f64 {
        e.evaluate(&[("t", t)]).unwrap()
    }

    #[test]
    fn cubic() {
        let d = parse("t^3").unwrap().differentiate("t");
        for t in [-1.5, 0.0, 0.3, 2.0] {
            assert!((at(&d, t) - 3.0 * t * t).abs() < 1e-14);
        }
    }

    #[test]
    fn product_rule() {
        let d = parse("t^2*sin(t)").unwrap().differentiate("t");
        for t in [-1.5f64, 0.3, 2.0] {
            let want = 2.0 * t * t.sin() + t * t * t.cos();
            assert!((at(&d, t) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn absent_variable_gives_zero() {
        let d = parse("x^2 + sin(y)").unwrap().derivative("t");
        assert!(d.is_zero(), "{d}");
    }

    #[test]
    fn repeated_derivatives() {
        let e = parse("sqrt(1+t^2)").unwrap();
        let d3 = e.derivative("t").derivative("t").derivative("t");
        // (1+t^2)^(-5/2) * (-3t)
        let t: f64 = 0.7;
        let want = -3.0 * t * (1.0 + t * t).powf(-2.5);
        assert!((at(&d3, t) - want).abs() < 1e-13);
    }
}
