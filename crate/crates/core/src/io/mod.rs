//! Files in and out: meshes, point clouds, checkpoints, run directories.

mod checkpoint;
mod export;
mod mesh;
mod normalize;
mod run;
mod svg;

pub use checkpoint::{
    checkpoint_string, load_checkpoint, parse_checkpoint, save_checkpoint, sha256_hex, CHECKPOINT_VERSION,
};
pub use export::{complex_obj_string, save_complex};
pub use mesh::{
    is_point_cloud, load_mesh, load_point_cloud, obj_string, parse_obj, parse_ply, ply_bytes, save_obj, save_ply,
    save_point_cloud, LoadedMesh,
};
pub use normalize::{box_normalization, normalize_to_box, Similarity};
pub use run::{InputProvenance, RunDir, RunManifest, RUN_DIR_ENV};
pub use svg::{save_svg, svg_string};
