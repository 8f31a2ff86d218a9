//! Integral min-cost flow and the layer-to-layer routing built on it.

mod layers;
mod mcf;

pub use layers::{
    cancel_opposite, reroute_commodities, route_between_layers, route_layers, LayerFlow, Reroute,
    Rerouted, Terminal, LP_REROUTE_MAX_VARS,
};
pub use mcf::{min_cost_flow, FlowArc, FlowNetwork, FlowResult, Infeasible};
