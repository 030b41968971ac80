pub mod birkhoff;
pub mod commalg;
pub mod connection;
pub mod gb;
pub mod golden;
pub mod matrix;
pub mod orealg;
pub mod pipeline;
pub mod poly;
pub mod quantum;
pub mod schubert;
pub mod toda;
