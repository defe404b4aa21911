import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    // Parity rollouts push a quarter gigabyte of pixels through the bridge.
    testTimeout: 180_000,
    hookTimeout: 30_000,
  },
});
