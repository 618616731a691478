pub mod chart;
pub mod forms;
pub mod poly;
pub mod scalar;
pub mod simplicial;
pub mod perf;
pub mod cochain;
pub mod mcgen;
pub mod hodge;
pub mod symbolic;
pub mod homology;
pub mod cech;
pub mod tot;
