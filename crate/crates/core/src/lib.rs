pub mod bridge;
pub mod cli;
pub mod data;
pub mod gog;
pub mod mock_sce;
pub mod parcoords;
pub mod render;
pub mod selection;
