//! User expressions in `x`, `y` and `r = |(x, y)|`.

use std::cell::RefCell;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use lma_core::Vec2;

pub struct Expr {
    text: String,
    node: Node<DefaultNumericTypes>,
    ctx: RefCell<HashMapContext<DefaultNumericTypes>>,
}

impl Expr {
    /// Compiles `text` and checks that it evaluates to a number at a
    /// sample point.
    pub fn parse(text: &str) -> Result<Self, String> {
        let node = build_operator_tree::<DefaultNumericTypes>(text)
            .map_err(|e| format!("`{text}`: {e}"))?;
        let e = Self {
            text: text.to_owned(),
            node,
            ctx: RefCell::new(HashMapContext::new()),
        };
        e.try_eval(Vec2::new(0.25, 0.5))
            .map_err(|m| format!("`{text}`: {m}"))?;
        Ok(e)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    fn try_eval(&self, p: Vec2) -> Result<f64, String> {
        let mut ctx = self.ctx.borrow_mut();
        for (k, v) in [("x", p.x), ("y", p.y), ("r", p.norm())] {
            ctx.set_value(k.into(), Value::from_float(v))
                .map_err(|e| e.to_string())?;
        }
        self.node
            .eval_number_with_context(&*ctx)
            .map_err(|e| e.to_string())
    }

    /// Value at `p`; NaN if evaluation fails there.
    pub fn eval(&self, p: Vec2) -> f64 {
        self.try_eval(p).unwrap_or(f64::NAN)
    }

    /// Value as a function of `r` alone (`x = r`, `y = 0`).
    pub fn eval_radial(&self, r: f64) -> f64 {
        self.eval(Vec2::new(r, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variables_and_functions() {
        let e = Expr::parse("1 + x^2 + y^2").unwrap();
        assert_eq!(e.eval(Vec2::new(1.0, 2.0)), 6.0);
        let e = Expr::parse("math::sqrt(r) - 0.5").unwrap();
        assert!((e.eval(Vec2::new(3.0, 4.0)) - (5f64.sqrt() - 0.5)).abs() < 1e-15);
        assert!(Expr::parse("1 + z").is_err());
        assert!(Expr::parse("1 +").is_err());
    }
}
