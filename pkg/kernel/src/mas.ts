/**
 * Monotonic alignment search over phoneme-by-frame log-likelihood grids.
 *
 * Mirrors the reference implementation exactly: float64 arithmetic, one
 * addition per DP cell accumulated left to right over frames, and the
 * stay-on-tie backtrack rule. Given the same doubles, the assignments are
 * identical down to the integers and the path totals down to the bits.
 *
 * Batch layout: row-major with the frame index fastest, i.e. element
 * (b, p, f) lives at b * pMax * fMax + p * fMax + f.
 */

export interface AlignmentPath {
  /** Phoneme index per frame; nondecreasing, steps of 0 or 1. */
  assignment: Int32Array;
  /** Frames per phoneme; each >= 1, sums to the frame count. */
  durations: Int32Array;
  /** Summed log-likelihood along the path. */
  total: number;
}

export interface BatchedLoglik {
  data: Float64Array;
  batch: number;
  pMax: number;
  fMax: number;
  validP: Int32Array;
  validF: Int32Array;
}

export class InfeasibleAlignmentError extends Error {
  constructor(message: string, readonly item?: number) {
    super(message);
    this.name = "InfeasibleAlignmentError";
  }
}

export class LayoutError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "LayoutError";
  }
}

let scratchGrid = new Float64Array(0);
let scratchValue = new Float64Array(0);

/**
 * Single-matrix alignment. `loglik` is row-major (P rows of F frames);
 * `stride` lets batched callers pass a wider row pitch than F.
 */
export function mas(
  loglik: Float64Array,
  P: number,
  F: number,
  offset = 0,
  stride = F,
): AlignmentPath {
  if (P < 1 || F < 1) {
    throw new InfeasibleAlignmentError(`empty valid region (${P}, ${F})`);
  }
  if (F < P) {
    throw new InfeasibleAlignmentError(
      `${F} frames cannot cover ${P} phonemes monotonically`,
    );
  }

  // One fused pass: validate finiteness and build a frame-major scratch
  // copy so the DP inner loops run contiguously. Buffers are reused
  // across calls.
  const cells = F * P;
  if (scratchGrid.length < cells) {
    scratchGrid = new Float64Array(cells);
    scratchValue = new Float64Array(cells);
  }
  const grid = scratchGrid;
  const value = scratchValue;
  for (let p = 0; p < P; p++) {
    const rowBase = offset + p * stride;
    for (let f = 0; f < F; f++) {
      const v = loglik[rowBase + f];
      if (!Number.isFinite(v)) {
        throw new InfeasibleAlignmentError(
          `non-finite log-likelihood at (${p}, ${f})`,
        );
      }
      grid[f * P + p] = v;
    }
  }

  value.fill(Number.NEGATIVE_INFINITY, 0, cells);
  value[0] = grid[0];
  for (let f = 1; f < F; f++) {
    const cur = f * P;
    const prev = cur - P;
    value[cur] = grid[cur] + value[prev];
    for (let p = 1; p < P; p++) {
      const stay = value[prev + p];
      const advance = value[prev + p - 1];
      value[cur + p] = grid[cur + p] + (stay >= advance ? stay : advance);
    }
  }

  const assignment = new Int32Array(F);
  let p = P - 1;
  assignment[F - 1] = p;
  for (let f = F - 1; f > 0; f--) {
    const prev = (f - 1) * P;
    const stay = value[prev + p];
    const advance = p > 0 ? value[prev + p - 1] : Number.NEGATIVE_INFINITY;
    if (!(stay >= advance)) {
      p -= 1;
    }
    assignment[f - 1] = p;
  }

  const durations = new Int32Array(P);
  for (let f = 0; f < F; f++) {
    durations[assignment[f]] += 1;
  }
  return { assignment, durations, total: value[(F - 1) * P + (P - 1)] };
}

/** Batched alignment; items are independent and error per item index. */
export function masBatch(batch: BatchedLoglik): AlignmentPath[] {
  const { data, batch: B, pMax, fMax, validP, validF } = batch;
  if (data.length !== B * pMax * fMax) {
    throw new LayoutError(
      `data length ${data.length} != ${B} * ${pMax} * ${fMax}`,
    );
  }
  if (validP.length !== B || validF.length !== B) {
    throw new LayoutError("validP/validF length must equal the batch size");
  }
  const paths: AlignmentPath[] = [];
  for (let b = 0; b < B; b++) {
    const P = validP[b];
    const F = validF[b];
    if (P < 1 || P > pMax || F < 1 || F > fMax) {
      throw new InfeasibleAlignmentError(
        `item ${b}: valid region (${P}, ${F}) outside (${pMax}, ${fMax})`,
        b,
      );
    }
    try {
      paths.push(mas(data, P, F, b * pMax * fMax, fMax));
    } catch (err) {
      if (err instanceof InfeasibleAlignmentError) {
        throw new InfeasibleAlignmentError(`item ${b}: ${err.message}`, b);
      }
      throw err;
    }
  }
  return paths;
}
