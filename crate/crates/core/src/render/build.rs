use nalgebra::Vector3;
use thiserror::Error;

use super::{RenderInstance, RenderScene};
use crate::assets::AssetLibrary;
use crate::scene::{FaceInstance, SceneSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("scene references unknown {0}")]
pub struct MissingAsset(pub String);

/// Instance ids: faces are `0..n` in scene order, occluders follow.
pub fn build_render_scene<'a>(scene: &SceneSpec, assets: &'a AssetLibrary) -> Result<RenderScene<'a>, MissingAsset> {
    let mut instances = Vec::new();
    for (fi, face) in scene.faces.iter().enumerate() {
        instances.push(face_instance(face, fi as u32, scene, assets)?);
    }
    let mut next_id = scene.faces.len() as u32;
    for face in &scene.faces {
        for inst in occluder_instances(face, next_id, scene, assets)? {
            next_id += 1;
            instances.push(inst);
        }
    }
    Ok(RenderScene { instances })
}

/// The head mesh of one face, posed and placed.
pub fn face_instance<'a>(
    face: &FaceInstance,
    id: u32,
    scene: &SceneSpec,
    assets: &'a AssetLibrary,
) -> Result<RenderInstance<'a>, MissingAsset> {
    let model = assets
        .model(&face.model_id)
        .ok_or_else(|| MissingAsset(format!("model `{}`", face.model_id)))?;
    let (r, t) = face.placement(&scene.camera);
    let mesh = &model.model.mesh;
    Ok(RenderInstance {
        id,
        positions: mesh.vertices.iter().map(|v| r * v + t).collect(),
        normals: model.normals.iter().map(|n| r * n).collect(),
        uvs: &mesh.uvs,
        triangles: &mesh.triangles,
        texture: mesh.texture.as_deref(),
        color: mesh.color,
    })
}

/// Occluders of one face with consecutive ids from `first_id`.
pub fn occluder_instances<'a>(
    face: &FaceInstance,
    first_id: u32,
    scene: &SceneSpec,
    assets: &'a AssetLibrary,
) -> Result<Vec<RenderInstance<'a>>, MissingAsset> {
    let model = assets
        .model(&face.model_id)
        .ok_or_else(|| MissingAsset(format!("model `{}`", face.model_id)))?;
    let (r, t) = face.placement(&scene.camera);
    let mut out = Vec::with_capacity(face.occluders.len());
    for (k, p) in face.occluders.iter().enumerate() {
        let occ = assets
            .occluder(&p.occluder_id)
            .ok_or_else(|| MissingAsset(format!("occluder `{}`", p.occluder_id)))?;
        let anchor = model
            .region_centroid(p.region)
            .ok_or_else(|| MissingAsset(format!("{} landmarks on `{}`", p.region, face.model_id)))?
            + Vector3::from(p.jitter);
        let mesh = &occ.mesh;
        out.push(RenderInstance {
            id: first_id + k as u32,
            positions: mesh.vertices.iter().map(|v| r * (anchor + v * p.scale) + t).collect(),
            normals: mesh.vertex_normals().iter().map(|n| r * n).collect(),
            uvs: &mesh.uvs,
            triangles: &mesh.triangles,
            texture: mesh.texture.as_deref(),
            color: mesh.color,
        });
    }
    Ok(out)
}
