/** Draft persistence round-trips form state and never auto-submits. */

import { describe, expect, it } from "vitest";

import { DraftStore, MemoryStore } from "../src/drafts.js";
import { canSubmit, emptyFormState } from "../src/widgets.js";
import { TASKS, conversationAssignment } from "./fixtures.js";

describe("draft store", () => {
  it("round-trips form state by assignment id", () => {
    const drafts = new DraftStore(new MemoryStore());
    const state = emptyFormState(TASKS.empathy!, conversationAssignment("empathy").unit);
    if (state.kind !== "abc") throw new Error("wrong kind");
    state.turns[1] = { widget: "empathy_radio", choice: "empathetic" };
    drafts.save("as-1", state);
    expect(drafts.load("as-1")).toEqual(state);
    expect(drafts.load("as-2")).toBeNull();
  });

  it("clears on demand", () => {
    const drafts = new DraftStore(new MemoryStore());
    drafts.save("as-1", { kind: "turn_likert", turns: { 1: 4 } });
    drafts.clear("as-1");
    expect(drafts.load("as-1")).toBeNull();
  });

  it("drops corrupt drafts instead of crashing", () => {
    const backend = new MemoryStore();
    backend.setItem("abceval-draft:as-1", "{not json");
    const drafts = new DraftStore(backend);
    expect(drafts.load("as-1")).toBeNull();
    expect(backend.getItem("abceval-draft:as-1")).toBeNull();
  });

  it("a restored incomplete draft is still gated by completeness", () => {
    const drafts = new DraftStore(new MemoryStore());
    const state = emptyFormState(TASKS.empathy!, conversationAssignment("empathy").unit);
    drafts.save("as-1", state);
    const restored = drafts.load("as-1");
    expect(restored).not.toBeNull();
    expect(canSubmit(restored!)).toBe(false);
  });
});
