use pfsm_core::composite::reference_plant;
use pfsm_core::ident::*;

#[test]
fn missing_records_are_named() {
    let cfg = DatasetConfig {
        chirp_duration: 0.5,
        ..DatasetConfig::default()
    };
    let mut data = synthesize_dataset(&reference_plant(), &cfg).unwrap();
    data.remove(Role::ChirpY);
    data.remove(Role::CreepX);
    let err = identify_pipeline(&data, &PipelineConfig::default()).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, pfsm_core::Error::Config(_)));
    assert!(msg.contains("chirp_y") && msg.contains("creep_x"), "{msg}");
}

#[test]
fn noiseless_round_trip() {
    let plant = reference_plant();
    let data = synthesize_dataset(&plant, &DatasetConfig::default()).unwrap();
    let mut stages = Vec::new();
    let result = identify_pipeline_with(&data, &PipelineConfig::default(), |r| stages.push(r.stage.clone())).unwrap();
    assert_eq!(&stages[..4], ["hysteresis_x", "creep_x", "em_xx", "em_xy"]);
    assert_eq!(stages.len(), result.reports.len());
    for score in evaluate_held_out(&result.model, &data).unwrap() {
        assert!(score.rmse <= 0.01, "{score:?}");
        assert!(score.rmse < score.rmse_without_coupling, "{score:?}");
    }
    let canon = result.model.x.crp.clone();
    assert_eq!((canon.num()[0], canon.den()[0]), (1.0, 1.0));
}
