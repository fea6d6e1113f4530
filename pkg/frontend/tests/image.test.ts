import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ImageDecodeError, loadImage, toGray, writePpm } from "../src/image";
import { syntheticFrame } from "./fixtures";

let dir: string;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "image-test-"));
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("image decoding", () => {
  const frame = syntheticFrame(32, 24, [{ cx: 16, cy: 12, r: 5, color: [200, 50, 50] }]);

  it("round-trips binary PPM", () => {
    const file = path.join(dir, "a.ppm");
    writePpm(file, frame);
    const back = loadImage(file);
    expect(back.width).toBe(32);
    expect(back.height).toBe(24);
    expect(Array.from(back.data)).toEqual(Array.from(frame.data));
  });

  it("decodes PGM as replicated gray", () => {
    const gray = Buffer.from(
      `P5\n4 2\n255\n` +
        String.fromCharCode(0, 64, 128, 255, 10, 20, 30, 40),
      "latin1"
    );
    const file = path.join(dir, "g.pgm");
    fs.writeFileSync(file, gray);
    const img = loadImage(file);
    expect(img.width).toBe(4);
    expect(img.data[0]).toBe(0);
    expect(img.data[1]).toBe(0);
    expect(img.data[9]).toBe(255); // pixel 3, green channel
  });

  it("decodes PNG when pngjs is available", () => {
    let PNG: any;
    try {
      PNG = require("pngjs").PNG;
    } catch {
      return; // optional dependency not installed in this environment
    }
    const png = new PNG({ width: frame.width, height: frame.height });
    for (let i = 0; i < frame.width * frame.height; i++) {
      png.data[4 * i] = frame.data[3 * i];
      png.data[4 * i + 1] = frame.data[3 * i + 1];
      png.data[4 * i + 2] = frame.data[3 * i + 2];
      png.data[4 * i + 3] = 255;
    }
    const file = path.join(dir, "a.png");
    fs.writeFileSync(file, PNG.sync.write(png));
    const back = loadImage(file);
    expect(back.width).toBe(frame.width);
    expect(Array.from(back.data)).toEqual(Array.from(frame.data));
  });

  it("rejects truncated and alien files", () => {
    const truncated = path.join(dir, "t.ppm");
    fs.writeFileSync(truncated, Buffer.from("P6\n8 8\n255\nxx"));
    expect(() => loadImage(truncated)).toThrow(ImageDecodeError);
    const alien = path.join(dir, "t.xyz");
    fs.writeFileSync(alien, Buffer.from("???"));
    expect(() => loadImage(alien)).toThrow(ImageDecodeError);
  });

  it("grayscale conversion weights sum to one", () => {
    const white = syntheticFrame(2, 2, []);
    white.data.fill(255);
    const gray = toGray(white);
    expect(gray[0]).toBeCloseTo(255, 5);
  });
});
