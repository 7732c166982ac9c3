import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // the deployed UI is served same-origin by the service; in tests the
    // service sits on an ephemeral port, so the simulated window must not
    // enforce the same-origin policy
    environmentOptions: {
      happyDOM: { settings: { fetch: { disableSameOriginPolicy: true } } },
    },
    include: ["tests/**/*.test.ts"],
    // the integration test spawns the real service and waits for generations
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
