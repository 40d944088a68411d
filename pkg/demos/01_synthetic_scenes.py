"""Render synthetic road scenes with exact ground-truth disparity.

A scene is a textured ground plane seen by a rectified stereo rig. Its
disparity is affine in the rotated image row, so we know the true value at
every pixel; disk defects (potholes, bumps) perturb it locally. The same
spec always renders byte-identical images, which makes these scenes usable
as regression oracles.

Run from the repository root:  python demos/01_synthetic_scenes.py
Artifacts are written to demos/output/.
"""

import os

import numpy as np

from roadstereo import (
    Defect,
    SceneSpec,
    ground_truth_disparity,
    render_stereo_pair,
    save_disparity_pfm,
    save_disparity_png16,
    save_gray_image,
)

out_dir = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(out_dir, exist_ok=True)

# A road-like scene: disparity grows from ~4 px at the top (far) to ~31 px
# at the bottom (near), with a slight rig roll and two defects.
scene = SceneSpec(
    width=320,
    height=240,
    theta=0.42,  # pitch: optical axis tilted toward the road
    psi=0.02,  # roll: disparities also vary a little along rows
    n_x=1.0,
    texture_seed=7,
    defects=(
        Defect(center=(140.0, 120.0), radius=12.0, depth_offset=-2.0),  # pothole
        Defect(center=(230.0, 180.0), radius=9.0, depth_offset=1.5),  # bump
    ),
)

alpha0, alpha1 = scene.plane_coefficients()
print(f"plane model: disparity = {alpha0:.3f} + {alpha1:.4f} * y(psi)")

gt = ground_truth_disparity(scene)
print(f"ground truth range: {gt.min():.2f} .. {gt.max():.2f} px")

ref, tar = render_stereo_pair(scene)
print(f"rendered {ref.shape[1]}x{ref.shape[0]} pair, "
      f"mean intensities {ref.mean():.1f} / {tar.mean():.1f}")

# rendering is deterministic: the same spec gives the same bytes
ref2, _ = render_stereo_pair(scene)
print("deterministic re-render:", np.array_equal(ref, ref2))

save_gray_image(ref, os.path.join(out_dir, "scene_ref.pgm"))
save_gray_image(tar, os.path.join(out_dir, "scene_tar.pgm"))
save_disparity_pfm(gt, os.path.join(out_dir, "scene_gt.pfm"))
save_disparity_png16(gt, os.path.join(out_dir, "scene_gt.png"))

# a quick 8-bit visualization of the ground truth (scaled to use the range)
vis = np.clip((gt - gt.min()) / (gt.max() - gt.min()) * 255.0, 0, 255)
save_gray_image(vis.astype(np.uint8), os.path.join(out_dir, "scene_gt_vis.pgm"))
print("wrote scene_ref/tar.pgm, scene_gt.pfm, scene_gt.png, scene_gt_vis.pgm")
