"""Red MsDCNN: configuración, calculadoras estructurales y pases forward/backward."""
