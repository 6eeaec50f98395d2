/** Deterministic client-side ordering of Likert/comparative dimensions.
 *
 * The presentation order is randomized per assignment so dimension position
 * doesn't bias ratings, but it must be stable across reloads of the same
 * assignment (drafts reference dimensions by label, and the annotator should
 * see the form they left). The assignment id is the seed.
 */

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function seededOrder<T>(items: readonly T[], seedText: string): T[] {
  const next = mulberry32(fnv1a(seedText));
  const out = [...items];
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    [out[i], out[j]] = [out[j]!, out[i]!];
  }
  return out;
}
