pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod growth;
pub mod poly;
pub mod rational;
pub mod render;
pub mod report;
pub mod roots;
pub mod schroeder;
pub mod series;
pub mod singularity;
pub mod sphere;
pub mod sweep;
pub mod unhyp;
