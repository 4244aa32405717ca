// bloom-proto/1 wire frames, exactly as the server emits them.

export const PROTOCOL_VERSION = "bloom-proto/1";

export type FrameType =
  | "userMessage"
  | "agentText"
  | "toolStatus"
  | "planWidget"
  | "chartWidget"
  | "gardenEvent"
  | "error"
  | "sessionControl";

export interface WireFrame {
  type: FrameType;
  sessionId: string | null;
  seq: number;
  payload: Record<string, unknown>;
}

export interface WorkoutDoc {
  id: string;
  activity: string;
  intensity: string;
  scheduledStart: string;
  durationMin: number;
  status: string;
  completionSource: string;
  linkedRecordId: string | null;
}

export interface PlanDoc {
  weekIndex: number;
  weekStart: string;
  workouts: WorkoutDoc[];
  editLog: unknown[];
}

export interface ChartBucket {
  periodStart: string;
  value: number;
}

export interface ChartPayload {
  sampleType: string;
  aggregationLevel: string;
  buckets: ChartBucket[];
  description: string;
  showUser: boolean;
}

export interface GardenFlower {
  slot: number;
  stage: number;
}

export interface GardenCritter {
  kind: string;
  color: string;
  size: string;
  workoutId: string;
}

export interface GardenDescriptor {
  weekNumber: number;
  frozen: boolean;
  flowers: GardenFlower[];
  rewards: string[];
  critters: GardenCritter[];
}

const FRAME_TYPES: ReadonlySet<string> = new Set([
  "userMessage", "agentText", "toolStatus", "planWidget",
  "chartWidget", "gardenEvent", "error", "sessionControl",
]);

export class FrameParseError extends Error {}

/** Parse one inbound websocket message into a frame; throws on garbage. */
export function parseFrame(raw: string): WireFrame {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new FrameParseError("frame is not valid JSON");
  }
  if (typeof data !== "object" || data === null) {
    throw new FrameParseError("frame must be an object");
  }
  const frame = data as Record<string, unknown>;
  if (typeof frame.type !== "string" || !FRAME_TYPES.has(frame.type)) {
    throw new FrameParseError(`unknown frame type: ${String(frame.type)}`);
  }
  if (typeof frame.seq !== "number") {
    throw new FrameParseError("frame seq missing");
  }
  if (typeof frame.payload !== "object" || frame.payload === null) {
    throw new FrameParseError("frame payload missing");
  }
  return {
    type: frame.type as FrameType,
    sessionId: (frame.sessionId as string | null) ?? null,
    seq: frame.seq,
    payload: frame.payload as Record<string, unknown>,
  };
}
