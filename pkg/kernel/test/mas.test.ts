import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  InfeasibleAlignmentError,
  LayoutError,
  mas,
  masBatch,
  type BatchedLoglik,
} from "../src/mas.js";
import { ServiceClient } from "../src/client.js";

/** Deterministic PRNG so failures are reproducible. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomGrid(rng: () => number, P: number, F: number): Float64Array {
  const grid = new Float64Array(P * F);
  for (let i = 0; i < grid.length; i++) {
    grid[i] = (rng() * 2 - 1) * 5;
  }
  return grid;
}

describe("mas kernel properties", () => {
  it("rejects fewer frames than phonemes", () => {
    expect(() => mas(new Float64Array(6), 3, 2)).toThrow(
      InfeasibleAlignmentError,
    );
  });

  it("rejects non-finite entries", () => {
    const grid = new Float64Array(8).fill(0);
    grid[3] = Number.NaN;
    expect(() => mas(grid, 2, 4)).toThrow(InfeasibleAlignmentError);
  });

  it("single phoneme takes every frame", () => {
    const path = mas(randomGrid(mulberry32(1), 1, 5), 1, 5);
    expect(Array.from(path.assignment)).toEqual([0, 0, 0, 0, 0]);
    expect(path.durations[0]).toBe(5);
  });

  it("produces valid monotonic surjective paths", () => {
    const rng = mulberry32(7);
    for (let trial = 0; trial < 200; trial++) {
      const P = 1 + Math.floor(rng() * 8);
      const F = P + Math.floor(rng() * 12);
      const path = mas(randomGrid(rng, P, F), P, F);
      expect(path.assignment[0]).toBe(0);
      expect(path.assignment[F - 1]).toBe(P - 1);
      for (let f = 1; f < F; f++) {
        const step = path.assignment[f] - path.assignment[f - 1];
        expect(step === 0 || step === 1).toBe(true);
      }
      let sum = 0;
      for (const d of path.durations) {
        expect(d).toBeGreaterThanOrEqual(1);
        sum += d;
      }
      expect(sum).toBe(F);
    }
  });

  it("is deterministic and shift invariant", () => {
    const rng = mulberry32(21);
    const grid = randomGrid(rng, 5, 11);
    const a = mas(grid, 5, 11);
    const b = mas(grid, 5, 11);
    expect(Array.from(a.assignment)).toEqual(Array.from(b.assignment));
    const shifted = grid.map((v) => v + 123.5);
    const c = mas(Float64Array.from(shifted), 5, 11);
    expect(Array.from(c.assignment)).toEqual(Array.from(a.assignment));
  });

  it("batch of one equals the single-matrix result", () => {
    const rng = mulberry32(3);
    const P = 4;
    const F = 9;
    const grid = randomGrid(rng, P, F);
    const single = mas(grid, P, F);
    const batched = masBatch({
      data: grid,
      batch: 1,
      pMax: P,
      fMax: F,
      validP: Int32Array.from([P]),
      validF: Int32Array.from([F]),
    })[0];
    expect(Array.from(batched.assignment)).toEqual(
      Array.from(single.assignment),
    );
    expect(batched.total).toBe(single.total);
  });

  it("never reads outside the valid region", () => {
    const pMax = 6;
    const fMax = 10;
    const rng = mulberry32(5);
    const data = new Float64Array(pMax * fMax).fill(Number.NaN);
    const P = 3;
    const F = 7;
    for (let p = 0; p < P; p++) {
      for (let f = 0; f < F; f++) {
        data[p * fMax + f] = rng();
      }
    }
    const batch: BatchedLoglik = {
      data,
      batch: 1,
      pMax,
      fMax,
      validP: Int32Array.from([P]),
      validF: Int32Array.from([F]),
    };
    const [path] = masBatch(batch);
    expect(path.assignment.length).toBe(F);
  });

  it("reports the offending item on infeasible input", () => {
    const batch: BatchedLoglik = {
      data: new Float64Array(2 * 3 * 4).fill(0),
      batch: 2,
      pMax: 3,
      fMax: 4,
      validP: Int32Array.from([2, 3]),
      validF: Int32Array.from([4, 2]),
    };
    expect(() => masBatch(batch)).toThrow(/item 1/);
  });

  it("rejects inconsistent layout", () => {
    expect(() =>
      masBatch({
        data: new Float64Array(5),
        batch: 1,
        pMax: 2,
        fMax: 4,
        validP: Int32Array.from([2]),
        validF: Int32Array.from([4]),
      }),
    ).toThrow(LayoutError);
  });
});

describe("bit-exactness against the reference service", () => {
  const port = 8907;
  const base = `http://127.0.0.1:${port}`;
  const client = new ServiceClient(base);
  let server: ChildProcess | null = null;

  beforeAll(async () => {
    server = spawn(
      "python3",
      ["-m", "multivox.cli", "serve", "--port", String(port)],
      { stdio: "ignore" },
    );
    const deadline = Date.now() + 90_000;
    while (Date.now() < deadline) {
      if (await client.health()) return;
      await new Promise((r) => setTimeout(r, 500));
    }
    throw new Error("reference service did not come up");
  }, 100_000);

  afterAll(() => {
    server?.kill("SIGTERM");
  });

  it(
    "matches the reference on 1000 random instances, P in [1,64], F in [P,256]",
    async () => {
      const rng = mulberry32(2024);
      const chunkSize = 50;
      const total = 1000;
      let checked = 0;
      for (let start = 0; start < total; start += chunkSize) {
        const grids: { P: number; F: number; grid: Float64Array }[] = [];
        for (let i = 0; i < chunkSize; i++) {
          const P = 1 + Math.floor(rng() * 64);
          const F = P + Math.floor(rng() * (256 - P + 1));
          grids.push({ P, F, grid: randomGrid(rng, P, F) });
        }
        const items = grids.map(({ P, F, grid }) => {
          const rows: number[][] = [];
          for (let p = 0; p < P; p++) {
            rows.push(Array.from(grid.subarray(p * F, (p + 1) * F)));
          }
          return { loglik: rows };
        });
        const reference = await client.masBatch(items);
        for (let i = 0; i < grids.length; i++) {
          const { P, F, grid } = grids[i];
          const local = mas(grid, P, F);
          expect(Array.from(local.assignment)).toEqual(
            reference[i].assignment,
          );
          expect(Array.from(local.durations)).toEqual(reference[i].durations);
          expect(local.total).toBe(reference[i].total);
          checked += 1;
        }
      }
      expect(checked).toBe(total);
    },
    300_000,
  );
});
