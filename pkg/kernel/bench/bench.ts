/**
 * Throughput report for the batched kernel on one 32 x 64 x 256 batch.
 *
 * The >= 5x-vs-reference target is soft and reported here, not asserted:
 * the reference lives behind HTTP, so a wire comparison mostly measures
 * serialization. Run with a service on --server to see it anyway.
 */

import { masBatch, type BatchedLoglik } from "../src/mas.js";
import { ServiceClient } from "../src/client.js";

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

function makeBatch(B: number, pMax: number, fMax: number): BatchedLoglik {
  const rng = mulberry32(99);
  const data = new Float64Array(B * pMax * fMax);
  for (let i = 0; i < data.length; i++) {
    data[i] = (rng() * 2 - 1) * 5;
  }
  const validP = new Int32Array(B).fill(pMax);
  const validF = new Int32Array(B).fill(fMax);
  return { data, batch: B, pMax, fMax, validP, validF };
}

async function main() {
  const batch = makeBatch(32, 64, 256);
  masBatch(batch); // warm up
  const reps = 10;
  const start = performance.now();
  for (let r = 0; r < reps; r++) {
    masBatch(batch);
  }
  const elapsed = (performance.now() - start) / 1000;
  const items = 32 * reps;
  const cells = 32 * 64 * 256 * reps;
  console.log(
    `kernel: ${items / elapsed | 0} items/s, ` +
      `${(cells / elapsed / 1e6).toFixed(1)} Mcells/s ` +
      `(${((elapsed / reps) * 1000).toFixed(1)} ms per 32x64x256 batch)`,
  );

  const serverArg = process.argv.find((a) => a.startsWith("--server="));
  if (serverArg) {
    const client = new ServiceClient(serverArg.split("=")[1]);
    const items32 = [];
    for (let b = 0; b < 32; b++) {
      const rows: number[][] = [];
      for (let p = 0; p < 64; p++) {
        const row: number[] = [];
        for (let f = 0; f < 256; f++) {
          row.push(batch.data[b * 64 * 256 + p * 256 + f]);
        }
        rows.push(row);
      }
      items32.push({ loglik: rows });
    }
    const t0 = performance.now();
    await client.masBatch(items32);
    const serviceSec = (performance.now() - t0) / 1000;
    const kernelSec = elapsed / reps;
    console.log(
      `service (incl. HTTP + JSON): ${(serviceSec * 1000).toFixed(0)} ms; ` +
        `kernel ${(serviceSec / kernelSec).toFixed(1)}x faster on this batch`,
    );
  }
}

main();
