// Control bounds, enforced on this side before anything touches the wire.
// The gateway checks them again; a value refused here is never sent.

export const VF_DIAMETER_MIN_MM = 20.0;
export const VF_DIAMETER_MAX_MM = 60.0;

export const PRESSURE_MIN_KPA = 0.0;
export const PRESSURE_MAX_KPA = 90.0;

export const SCALE_MIN = 0.5;
export const SCALE_MAX = 4.0;

export function vfDiameterAccepted(diameterMm: number): boolean {
  return (
    Number.isFinite(diameterMm) &&
    diameterMm >= VF_DIAMETER_MIN_MM &&
    diameterMm <= VF_DIAMETER_MAX_MM
  );
}

export function pressureAccepted(pressureKpa: number): boolean {
  return (
    Number.isFinite(pressureKpa) &&
    pressureKpa >= PRESSURE_MIN_KPA &&
    pressureKpa <= PRESSURE_MAX_KPA
  );
}

export function scaleAccepted(kScale: number): boolean {
  return Number.isFinite(kScale) && kScale >= SCALE_MIN && kScale <= SCALE_MAX;
}

export function vfPayload(diameterMm: number): { diameter_mm: number } {
  if (!vfDiameterAccepted(diameterMm)) {
    throw new RangeError(
      `fixture diameter ${diameterMm} mm is outside [${VF_DIAMETER_MIN_MM}, ${VF_DIAMETER_MAX_MM}]`,
    );
  }
  return { diameter_mm: diameterMm };
}

export function pressurePayload(pressureKpa: number): { pressure_kpa: number } {
  if (!pressureAccepted(pressureKpa)) {
    throw new RangeError(
      `pressure ${pressureKpa} kPa is outside [${PRESSURE_MIN_KPA}, ${PRESSURE_MAX_KPA}]`,
    );
  }
  return { pressure_kpa: pressureKpa };
}

export function scalePayload(kScale: number): { k_scale: number } {
  if (!scaleAccepted(kScale)) {
    throw new RangeError(`motion scale ${kScale} is outside [${SCALE_MIN}, ${SCALE_MAX}]`);
  }
  return { k_scale: kScale };
}
