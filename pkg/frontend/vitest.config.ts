import { defineConfig } from "vitest/config";

// Every test drives the core through child processes (interpreter start-up
// plus compiled-kernel cache loading per call), so the default 5 s budget
// is far too tight.
export default defineConfig({
  test: {
    testTimeout: 300_000,
    hookTimeout: 60_000,
  },
});
