use super::{Expr, Rational};

pub(super) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(_) | Expr::Add(..) | Expr::Sub(..) => collect_sum(e),
        Expr::Mul(..) => collect_product(e),
        Expr::Div(a, b) => {
            let a = simplify(a);
            let b = simplify(b);
            match (&a, &b) {
                (_, Expr::Num(d)) if *d == 1.0 => a,
                (Expr::Num(n), _) if *n == 0.0 => Expr::Num(0.0),
                (_, Expr::Num(d)) if *d != 0.0 => collect_product(&(Expr::Num(1.0 / d) * a)),
                _ => fold(a / b),
            }
        }
        Expr::Pow(a, r) => {
            let a = simplify(a);
            if r.num() == 0 {
                Expr::Num(1.0)
            } else if *r == Rational::integer(1) {
                a
            } else {
                fold(a.pow(*r))
            }
        }
        Expr::Call(f, a) => fold(Expr::call(*f, simplify(a))),
    }
}

/// Replace a node whose operands are all literals by its value.
fn fold(e: Expr) -> Expr {
    let constant = match &e {
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.as_num().is_some(),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            a.as_num().is_some() && b.as_num().is_some()
        }
        _ => false,
    };
    if constant {
        if let Ok(v) = e.evaluate(&[] as &[(&str, f64)]) {
            return Expr::Num(v);
        }
    }
    e
}

fn collect_sum(e: &Expr) -> Expr {
    let mut terms: Vec<(f64, Expr)> = Vec::new();
    let mut constant = 0.0;
    gather_terms(e, 1.0, &mut terms, &mut constant);

    let mut merged: Vec<(f64, Expr)> = Vec::with_capacity(terms.len());
    for (c, m) in terms {
        if let Some(slot) = merged.iter_mut().find(|(_, other)| *other == m) {
            slot.0 += c;
        } else {
            merged.push((c, m));
        }
    }
    merged.retain(|(c, _)| *c != 0.0);

    let mut acc: Option<Expr> = None;
    for (c, m) in merged {
        acc = Some(match acc {
            None => scaled(c, m),
            Some(lhs) if c < 0.0 => lhs - scaled(-c, m),
            Some(lhs) => lhs + scaled(c, m),
        });
    }
    match acc {
        None => Expr::Num(constant),
        Some(lhs) if constant == 0.0 => lhs,
        Some(lhs) if constant < 0.0 => lhs - Expr::Num(-constant),
        Some(lhs) => lhs + Expr::Num(constant),
    }
}

fn gather_terms(e: &Expr, sign: f64, terms: &mut Vec<(f64, Expr)>, constant: &mut f64) {
    match e {
        Expr::Neg(a) => gather_terms(a, -sign, terms, constant),
        Expr::Add(a, b) => {
            gather_terms(a, sign, terms, constant);
            gather_terms(b, sign, terms, constant);
        }
        Expr::Sub(a, b) => {
            gather_terms(a, sign, terms, constant);
            gather_terms(b, -sign, terms, constant);
        }
        _ => {
            let s = simplify(e);
            match s {
                Expr::Num(v) => *constant += sign * v,
                Expr::Add(..) | Expr::Sub(..) | Expr::Neg(_) => {
                    gather_terms(&s, sign, terms, constant)
                }
                other => {
                    let (c, m) = split_coefficient(other);
                    terms.push((sign * c, m));
                }
            }
        }
    }
}

/// Split `c * m` into its numeric coefficient and the remaining monomial.
fn split_coefficient(e: Expr) -> (f64, Expr) {
    match e {
        Expr::Mul(a, b) => match (*a, *b) {
            (Expr::Num(c), m) | (m, Expr::Num(c)) => (c, m),
            (a, b) => (1.0, a * b),
        },
        other => (1.0, other),
    }
}

fn scaled(c: f64, m: Expr) -> Expr {
    if c == 1.0 {
        m
    } else if c == -1.0 {
        -m
    } else {
        Expr::Num(c) * m
    }
}

fn collect_product(e: &Expr) -> Expr {
    let mut factors = Vec::new();
    let mut coeff = 1.0;
    gather_factors(e, &mut factors, &mut coeff);
    if coeff == 0.0 {
        return Expr::Num(0.0);
    }
    let Some(product) = factors.into_iter().reduce(|a, b| a * b) else {
        return Expr::Num(coeff);
    };
    scaled(coeff, product)
}

fn gather_factors(e: &Expr, factors: &mut Vec<Expr>, coeff: &mut f64) {
    match e {
        Expr::Mul(a, b) => {
            gather_factors(a, factors, coeff);
            gather_factors(b, factors, coeff);
        }
        _ => match simplify(e) {
            Expr::Num(v) => *coeff *= v,
            Expr::Neg(a) => {
                *coeff = -*coeff;
                gather_factors(&a, factors, coeff);
            }
            s @ Expr::Mul(..) => gather_factors(&s, factors, coeff),
            s => factors.push(s),
        },
    }
}
