/** Draft persistence: form state survives a page reload, keyed by assignment.
 *
 * Drafts are saved on every change and cleared on successful submission.
 * Loading a draft never submits it — the annotator always re-confirms.
 */

import type { FormState } from "./widgets.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const PREFIX = "abceval-draft:";

export class DraftStore {
  constructor(private readonly backend: KeyValueStore) {}

  save(assignmentId: string, state: FormState): void {
    this.backend.setItem(PREFIX + assignmentId, JSON.stringify(state));
  }

  load(assignmentId: string): FormState | null {
    const raw = this.backend.getItem(PREFIX + assignmentId);
    if (raw === null) return null;
    try {
      return JSON.parse(raw) as FormState;
    } catch {
      this.backend.removeItem(PREFIX + assignmentId);
      return null;
    }
  }

  clear(assignmentId: string): void {
    this.backend.removeItem(PREFIX + assignmentId);
  }
}

/** In-memory fallback when localStorage is unavailable (private browsing). */
export class MemoryStore implements KeyValueStore {
  private readonly data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}
