import { beforeEach, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/gateway.js";
import { ConsoleStore } from "../src/store.js";
import { renderQueue } from "../src/views.js";
import { FixtureGateway, conflictFixture } from "./fixture_gateway.js";

let gateway: FixtureGateway;
let store: ConsoleStore;

beforeEach(() => {
  gateway = new FixtureGateway();
  store = new ConsoleStore(
    new GatewayClient("", "test-token", gateway.fetchImpl),
  );
});

describe("arbitration queue", () => {
  it("renders an empty state", async () => {
    await store.loadInitial();
    expect(renderQueue(store)).toContain("No conflicts awaiting arbitration");
  });

  it("renders cards in server order (deadline asc, id asc)", async () => {
    gateway.conflicts = [
      conflictFixture(2, 6),
      conflictFixture(5, 6),
      conflictFixture(1, 9),
    ];
    await store.loadInitial();
    const html = renderQueue(store);
    const order = [...html.matchAll(/data-card="(\d+)"/g)].map((m) => m[1]);
    expect(order).toEqual(["2", "5", "1"]);
  });

  it("removes a card when the stream reports its verdict, without refetching", async () => {
    gateway.conflicts = [conflictFixture(2, 6), conflictFixture(5, 6)];
    await store.loadInitial();
    const fetches = gateway.countCalls("GET /v1/conflicts");
    await store.handleRecord(gateway.verdictAppliedRecord(2, "approved", 40, 5));
    expect(store.cards.map((card) => card.conflict.id)).toEqual([5]);
    expect(gateway.countCalls("GET /v1/conflicts")).toBe(fetches);
    expect(store.notices[0]).toContain("approved by other-arbiter");
  });

  it("adds newly escalated conflicts from the stream in queue order", async () => {
    gateway.conflicts = [conflictFixture(3, 8)];
    await store.loadInitial();
    await store.handleRecord(gateway.escalatedRecord(conflictFixture(4, 6), 41, 5));
    expect(store.cards.map((card) => card.conflict.id)).toEqual([4, 3]);
  });

  it("drops expired conflicts and notes the default denial", async () => {
    gateway.conflicts = [conflictFixture(3, 8)];
    await store.loadInitial();
    await store.handleRecord(gateway.expiredRecord(3, 42, 8));
    expect(store.cards).toEqual([]);
    expect(store.notices[0]).toContain("expired unarbitrated");
  });

  it("updates countdowns from stream ticks, not wall clock", async () => {
    gateway.conflicts = [conflictFixture(3, 9)];
    await store.loadInitial();
    expect(renderQueue(store)).toContain("4 ticks left"); // summary tick 5
    await store.handleRecord(gateway.metricsRecord(50, 6)); // tick 6 completed
    expect(store.tick).toBe(7);
    expect(renderQueue(store)).toContain("2 ticks left");
  });
});
