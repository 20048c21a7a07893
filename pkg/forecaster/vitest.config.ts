import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // Every suite shares one WASM tf backend and the acceptance flow forks
    // real planner/trainer processes, so keep files sequential.
    fileParallelism: false,
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
