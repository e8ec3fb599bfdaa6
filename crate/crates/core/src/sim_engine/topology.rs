use crate::error::{Error, Result};
use crate::frac_tf::{
    fit_frac_response, ApproxConfig, FitTarget, FracBlock, FracElement, FracPI, HighOrderPlant, PredictorSplit,
};

use super::network::{Chain, LoopModel, Source};
use super::simulate::Topology;

/// Rational stand-ins for the plant and the two predictor parts. They depend
/// only on the plant and `chi`, so a tuning run fits them once and reuses them
/// for every controller candidate.
#[derive(Debug, Clone)]
pub struct PredictorBlocks {
    pub plant: FracBlock,
    /// `K / (Ts+1)^chi`
    pub model: FracBlock,
    /// `1 / (Ts+1)^(n - chi)`
    pub lag: FracBlock,
}

impl PredictorBlocks {
    pub fn fit(plant: &HighOrderPlant, split: &PredictorSplit, cfg: &ApproxConfig) -> Result<Self> {
        if split.chi >= plant.order {
            return Err(Error::invalid(format!("chi ({}) must be below the plant order ({})", split.chi, plant.order)));
        }
        Ok(PredictorBlocks {
            plant: fit_frac_response(FitTarget::Element((*plant).into()), cfg)?,
            model: fit_frac_response(FitTarget::Element(split.model_element(plant)), cfg)?,
            lag: fit_frac_response(FitTarget::Element(split.lag_element(plant)), cfg)?,
        })
    }
}

pub fn fit_controller(ctrl: &FracPI, cfg: &ApproxConfig) -> Result<FracBlock> {
    fit_frac_response(FitTarget::Element(FracElement::from(*ctrl)), cfg)
}

/// Fits every block and wires the loop.
pub fn build_loop(
    plant: &HighOrderPlant,
    ctrl: &FracPI,
    split: &PredictorSplit,
    cfg: &ApproxConfig,
    topology: Topology,
) -> Result<LoopModel> {
    let blocks = PredictorBlocks::fit(plant, split, cfg)?;
    let controller = fit_controller(ctrl, cfg)?;
    wire_loop(&controller, &blocks, topology)
}

const GC: usize = 0;
const G: usize = 1;
const GP1: usize = 2;
const GP2: usize = 3;

/// Wires already-fitted blocks. The disturbance enters at the plant input
/// only; the predictor path sees the bare control signal.
pub fn wire_loop(controller: &FracBlock, blocks: &PredictorBlocks, topology: Topology) -> Result<LoopModel> {
    use Source::*;
    let chain = |name: &str, b: &FracBlock| -> Result<Chain> { Ok(Chain::new(name, b.realize()?)) };
    let (gc, g, gp1, gp2) = (
        chain("controller", controller)?,
        chain("plant", &blocks.plant)?,
        chain("model", &blocks.model)?,
        chain("lag", &blocks.lag)?,
    );
    let chains = match topology {
        Topology::Fig1Predictor => vec![
            // e' = r - y - Gp1 u + Gp2 Gp1 u
            gc.fed_by(&[(1.0, Setpoint), (-1.0, Block(G)), (-1.0, Block(GP1)), (1.0, Block(GP2))]),
            g.fed_by(&[(1.0, Block(GC)), (1.0, Disturbance)]),
            gp1.fed_by(&[(1.0, Block(GC))]),
            gp2.fed_by(&[(1.0, Block(GP1))]),
        ],
        Topology::Fig3Equivalent => vec![
            // inner loop Gc / (1 + Gc Gp1 (1 - Gp2)) closed around r - y
            gc.fed_by(&[(1.0, Setpoint), (-1.0, Block(G)), (-1.0, Block(GP1))]),
            g.fed_by(&[(1.0, Block(GC)), (1.0, Disturbance)]),
            gp1.fed_by(&[(1.0, Block(GC)), (-1.0, Block(GP2))]),
            gp2.fed_by(&[(1.0, Block(GC))]),
        ],
    };
    LoopModel::new(chains, G, GC)
}

/// The plant alone, driven by `r + d`; `u` reports the applied input.
pub fn open_loop(plant: &FracBlock) -> Result<LoopModel> {
    use Source::*;
    let input = Chain::new("input", vec![crate::sim_engine::StateSpaceModel::gain(1.0)])
        .fed_by(&[(1.0, Setpoint), (1.0, Disturbance)]);
    let g = Chain::new("plant", plant.realize()?).fed_by(&[(1.0, Block(0))]);
    LoopModel::new(vec![input, g], 1, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim_engine::{simulate, SimConfig};

    fn paper_plant() -> HighOrderPlant {
        HighOrderPlant::new(1.0, 20.0, 4.0).unwrap()
    }

    #[test]
    fn state_dimension_is_sum_of_block_orders() {
        let p = paper_plant();
        let split = PredictorSplit::new(0.8, &p).unwrap();
        let cfg = ApproxConfig::default();
        let blocks = PredictorBlocks::fit(&p, &split, &cfg).unwrap();
        let gc = fit_controller(&FracPI::new(0.5, 0.02, 1.1).unwrap(), &cfg).unwrap();
        let lm = wire_loop(&gc, &blocks, Topology::Fig1Predictor).unwrap();
        let want = gc.order() + blocks.plant.order() + blocks.model.order() + blocks.lag.order();
        assert_eq!(lm.order(), want);
        let names: Vec<&str> = lm.block_orders().iter().map(|b| b.0).collect();
        assert_eq!(names, ["controller", "plant", "model", "lag"]);
    }

    #[test]
    fn zero_inputs_keep_the_loop_at_rest() {
        let p = paper_plant();
        let split = PredictorSplit::new(0.6, &p).unwrap();
        let ctrl = FracPI::new(0.8, 0.02, 1.0).unwrap();
        let mut lm = build_loop(&p, &ctrl, &split, &ApproxConfig::default(), Topology::Fig1Predictor).unwrap();
        let sim = SimConfig {
            setpoint_amp: 0.0,
            disturbance_amp: 0.0,
            horizon: 50.0,
            disturbance_time: 40.0,
            ..SimConfig::default()
        };
        let tr = simulate(&mut lm, &sim).unwrap();
        assert!(tr.y.iter().chain(&tr.u).all(|&v| v == 0.0));
    }

    #[test]
    fn open_loop_step_matches_oracle() {
        let g = fit_frac_response(FitTarget::Element(paper_plant().into()), &ApproxConfig::default()).unwrap();
        let mut lm = open_loop(&g).unwrap();
        let sim = SimConfig {
            setpoint_time: 0.0,
            disturbance_time: 100.0,
            disturbance_amp: 0.0,
            horizon: 100.0,
            ..SimConfig::default()
        };
        let tr = simulate(&mut lm, &sim).unwrap();
        let i = tr.t.iter().position(|&t| (t - 80.0).abs() < 1e-9).unwrap();
        assert!((tr.y[i] - 0.566530).abs() < 1e-5, "{}", tr.y[i]);
    }

    #[test]
    fn integral_action_removes_static_error() {
        let p = paper_plant();
        let split = PredictorSplit::new(1.4, &p).unwrap();
        let ctrl = FracPI::new(2.0, 0.5, 0.6).unwrap();
        for topology in [Topology::Fig1Predictor, Topology::Fig3Equivalent] {
            let lm = build_loop(&p, &ctrl, &split, &ApproxConfig::default(), topology).unwrap();
            let (y, _) = lm.steady_state([1.0, 5.0]).unwrap();
            assert!((y - 1.0).abs() < 1e-6, "{topology:?}: {y}");
        }
    }

    #[test]
    fn chi_at_or_above_order_is_rejected() {
        let p = paper_plant();
        let split = PredictorSplit { chi: 4.0 };
        assert!(PredictorBlocks::fit(&p, &split, &ApproxConfig::default()).is_err());
    }
}
