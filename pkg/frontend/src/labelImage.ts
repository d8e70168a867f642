// Pixel-exact rendering of u8 tensor images. No smoothing, integer scaling
// only: each source pixel becomes a k x k block.

import { base64ToBytes } from "./base64.js";
import type { TensorPayloadWire } from "./types.js";

export interface DecodedImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray;
}

export function decodeLabelImage(payload: TensorPayloadWire): DecodedImage {
  if (payload.dtype !== "u8") {
    throw new Error(`image payload must be u8, got '${payload.dtype}'`);
  }
  const shape = payload.shape;
  const rank3 = shape.length === 3 && shape[2] === 3;
  if (!rank3 && shape.length !== 2) {
    throw new Error(`image shape must be [H,W] or [H,W,3], got [${shape.join(",")}]`);
  }
  const [height, width] = shape;
  const channels = rank3 ? 3 : 1;
  const bytes = base64ToBytes(payload.data);
  if (bytes.length !== width * height * channels) {
    throw new Error(`payload has ${bytes.length} bytes, expected ${width * height * channels}`);
  }
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    const src = i * channels;
    rgba[i * 4] = bytes[src];
    rgba[i * 4 + 1] = bytes[src + (rank3 ? 1 : 0)];
    rgba[i * 4 + 2] = bytes[src + (rank3 ? 2 : 0)];
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, rgba };
}

export function scaleRgbaNearest(image: DecodedImage, k: number): DecodedImage {
  if (!Number.isInteger(k) || k < 1) {
    throw new Error(`scale factor must be a positive integer, got ${k}`);
  }
  if (k === 1) return image;
  const { width, height, rgba } = image;
  const out = new Uint8ClampedArray(width * k * height * k * 4);
  for (let y = 0; y < height * k; y++) {
    const srcRow = Math.floor(y / k) * width;
    for (let x = 0; x < width * k; x++) {
      const src = (srcRow + Math.floor(x / k)) * 4;
      const dst = (y * width * k + x) * 4;
      out[dst] = rgba[src];
      out[dst + 1] = rgba[src + 1];
      out[dst + 2] = rgba[src + 2];
      out[dst + 3] = rgba[src + 3];
    }
  }
  return { width: width * k, height: height * k, rgba: out };
}

export function fitScale(image: DecodedImage, targetEdge = 512): number {
  const longest = Math.max(image.width, image.height);
  return Math.max(1, Math.floor(targetEdge / longest));
}

export function renderLabelImage(payload: TensorPayloadWire, scale?: number): HTMLCanvasElement {
  const decoded = decodeLabelImage(payload);
  const k = scale ?? fitScale(decoded);
  const scaled = scaleRgbaNearest(decoded, k);
  const canvas = document.createElement("canvas");
  canvas.width = scaled.width;
  canvas.height = scaled.height;
  canvas.style.imageRendering = "pixelated";
  const ctx = canvas.getContext("2d");
  if (ctx) {
    // fresh copy: ImageData requires a plain ArrayBuffer-backed view
    const pixels = new Uint8ClampedArray(scaled.rgba);
    ctx.putImageData(new ImageData(pixels, scaled.width, scaled.height), 0, 0);
  }
  return canvas;
}
