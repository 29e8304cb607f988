#!/usr/bin/env python3
"""Walk one image through every preprocessing stage.

Renders a synthetic bean photo, then shows what each stage does to it:
Gaussian blur, HSV conversion, the boolean foreground mask, background
removal, resizing, and [0,1] normalization. Stage images land in
./demo_output/preprocessing/.
"""
from pathlib import Path

import numpy as np

from beanroast import (
    PreprocessConfig,
    RoastClass,
    SynthConfig,
    apply_mask,
    compute_mask,
    gaussian_blur,
    normalize,
    resize,
    rgb_to_hsv,
    synthesize_bean_image,
    write_image,
)
from beanroast.imaging import mask_to_image

out = Path("demo_output/preprocessing")
out.mkdir(parents=True, exist_ok=True)

config = PreprocessConfig()
print("pipeline configuration:", config)

img = synthesize_bean_image(
    RoastClass.MEDIUM,
    SynthConfig(image_size=224, background_modes=("lightbox_white",)),
    np.random.default_rng(42),
)
print(f"\ninput: {img.width}x{img.height} {img.color_space}, "
      f"true bean fraction {img.meta['bean_fraction']:.3f}")
write_image(img, out / "0_input.png")

blurred = gaussian_blur(img, config)
write_image(blurred, out / "1_blurred.png")
print("blurred with a", config.blur_kernel_size, "x", config.blur_kernel_size,
      "kernel, sigma", config.blur_sigma)

hsv = rgb_to_hsv(blurred)
print(f"HSV ranges: H [{hsv.pixels[..., 0].min():.1f}, {hsv.pixels[..., 0].max():.1f}] deg, "
      f"S [{hsv.pixels[..., 1].min():.2f}, {hsv.pixels[..., 1].max():.2f}], "
      f"V [{hsv.pixels[..., 2].min():.2f}, {hsv.pixels[..., 2].max():.2f}]")

mask = compute_mask(hsv, config)
write_image(mask_to_image(mask), out / "2_mask.png")
print(f"mask keeps {mask.foreground_fraction:.3f} of pixels "
      f"(ground truth {img.meta['bean_fraction']:.3f})")

masked = apply_mask(blurred, mask)
write_image(masked, out / "3_masked.png")

resized = resize(masked, config.target_size)
final = normalize(resized)
write_image(final, out / "4_final.png")
print(f"\nfinal tensor: {final.pixels.shape}, values in "
      f"[{final.pixels.min():.2f}, {final.pixels.max():.2f}] -> ready for the classifier")
print(f"stage images written to {out}/")
