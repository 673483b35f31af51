use facegen::assets::{load_face_model, make_test_head, write_face_model, AssetLibrary};
use facegen::pipeline::{generate_image, JobConfig};
use facegen::scene::OcclusionMode;

#[test]
fn face_model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let head = make_test_head(4, 6).unwrap();
    let (obj, lmk) = write_face_model(&head, dir.path(), "h").unwrap();
    let back = load_face_model(&obj, &lmk).unwrap();
    // Vertices are renumbered in first-use order; compare triangle corners.
    assert_eq!(back.mesh.triangles.len(), head.mesh.triangles.len());
    for (ta, tb) in back.mesh.triangles.iter().zip(&head.mesh.triangles) {
        for k in 0..3 {
            let (a, b) = (back.mesh.vertices[ta[k] as usize], head.mesh.vertices[tb[k] as usize]);
            assert!((a - b).norm() < 1e-6);
            let (ua, ub) = (back.mesh.uvs[ta[k] as usize], head.mesh.uvs[tb[k] as usize]);
            assert!((ua[0] - ub[0]).abs() < 1e-6 && (ua[1] - ub[1]).abs() < 1e-6);
        }
    }
    for (a, b) in back.landmarks.iter().zip(&head.landmarks) {
        assert_eq!((a.index, a.region), (b.index, b.region));
        assert!((a.position - b.position).norm() < 1e-6);
    }
}

fn small_job() -> JobConfig {
    let mut job = JobConfig::default();
    job.generation.num_images = 4;
    job.generation.seed = 21;
    job.generation.occlusion_mode = OcclusionMode::Mixed;
    job.render.target_resolution = [200, 150];
    job.render.base_resolutions = vec![400, 100];
    job
}

#[test]
fn images_are_reproducible_and_consistent() {
    let assets = AssetLibrary::builtin();
    let job = small_job();
    for i in 0..job.generation.num_images {
        let a = generate_image(&job, &assets, i).unwrap();
        let b = generate_image(&job, &assets, i).unwrap();
        assert_eq!(a.rgb, b.rgb);
        assert_eq!(a.annotations, b.annotations);
        assert_eq!(a.rgb.len(), 200 * 150 * 3);
        assert!([400, 100].contains(&a.base_width));
        assert_eq!(a.annotations.len(), a.scene.faces.len());
        assert_eq!(a.landmarks.len(), a.scene.faces.len());
        for ann in &a.annotations {
            assert!((0.0..=1.0).contains(&ann.visibility));
            assert!(ann.bbox.x >= 0.0 && ann.bbox.right() <= 200.0);
            assert!(ann.bbox.y >= 0.0 && ann.bbox.bottom() <= 150.0);
        }
    }
}

#[test]
fn seeds_change_the_scene() {
    let assets = AssetLibrary::builtin();
    let job = small_job();
    let mut other = small_job();
    other.generation.seed = 22;
    let a = generate_image(&job, &assets, 0).unwrap();
    let b = generate_image(&other, &assets, 0).unwrap();
    assert_ne!(a.rgb, b.rgb);
}

#[test]
fn debug_maps_have_the_base_resolution() {
    let assets = AssetLibrary::builtin();
    let mut job = small_job();
    job.render.debug_maps = true;
    let out = generate_image(&job, &assets, 1).unwrap();
    let d = out.debug.expect("debug maps requested");
    assert_eq!(d.depth.width(), out.base_width);
    assert_eq!(d.instance.dimensions(), d.depth.dimensions());
}
