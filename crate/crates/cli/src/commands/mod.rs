pub mod analyze;
pub mod fitcmd;
pub mod model;
pub mod plot;
pub mod simulate;
pub mod wire;
