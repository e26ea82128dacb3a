//! Small worked examples shared by tests, benches and the CLI.

use crate::affine::{AffineForm, NoiseSymbolId};
use crate::dd::{ite, Aadd, Context};
use crate::error::Result;
use crate::lp::Sense;

use super::{ScenarioConfig, WaterLevelParams};

/// `a = 1 + 2e1` and `b = 2 - 2e1 + e2` over fresh symbols.
pub struct SumExample {
    pub a: AffineForm,
    pub b: AffineForm,
    pub e1: NoiseSymbolId,
    pub e2: NoiseSymbolId,
}

pub fn sum_example() -> SumExample {
    let e1 = NoiseSymbolId::fresh();
    let e2 = NoiseSymbolId::fresh();
    SumExample {
        a: AffineForm::from_parts(1.0, [(e1, 2.0)], 0.0).expect("finite"),
        b: AffineForm::from_parts(2.0, [(e1, -2.0), (e2, 1.0)], 0.0).expect("finite"),
        e1,
        e2,
    }
}

/// `b = 3 + e1; if (b > 3) b += 10; else b -= 10;`
pub struct BranchExample {
    pub b: Aadd,
    pub e1: NoiseSymbolId,
}

pub fn branch_example(ctx: &Context) -> Result<BranchExample> {
    let (form, e1) = AffineForm::new_uncertain_with_symbol(3.0, 1.0)?;
    let b = Aadd::real(form);
    let cond = ctx.compare_with(&b, Sense::Gt, &Aadd::constant(3.0))?;
    let b = ite(&cond, &b.add_const(10.0)?, &b.add_const(-10.0)?)?;
    Ok(BranchExample { b, e1 })
}

/// The tank draining with the pump off for one second.
pub fn tank_drain() -> Result<ScenarioConfig> {
    let mut c = WaterLevelParams::default().forced_pump(false)?;
    c.horizon = 1.0;
    Ok(c)
}

/// `x' = rising` from `x = 5`, ten steps of 0.1 s.
pub fn ramp() -> ScenarioConfig {
    let text = r#"
        name = "ramp"
        horizon = 1.0

        [[uncertain]]
        name = "rising"
        center = 1.0
        radius = 0.1

        [[process]]
        name = "rate"
        kind = "constant"
        period = 0.1
        params = { value = "rising" }

        [[process]]
        name = "x"
        kind = "integrator"
        period = 0.1
        params = { x0 = 5.0 }

        [[connection]]
        from = "rate.y"
        to = "x.u"
    "#;
    toml::from_str(text).expect("fixture parses")
}
